#pragma once

// Distance and dot-product kernels shared by the index, the classifiers and
// the brute-force oracle. Every kernel has a portable scalar reference
// implementation; vectorized variants are selected once at startup from the
// CPU feature set and can be overridden for testing.

#include <cstddef>
#include <string_view>

namespace dlmi::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
    /// Sum of squared component differences, accumulated in double.
    double (*l2_squared)(const float* a, const float* b, std::size_t n);
    /// Dot product of two double rows.
    double (*dot_f64)(const double* a, const double* b, std::size_t n);
};

bool isa_supported(Isa isa);

/// Best ISA available on this CPU, honouring DLMI_SIMD=scalar in the environment.
Isa detect_isa();

/// Kernel table for a specific ISA. Throws std::invalid_argument when the CPU
/// lacks the instructions.
const KernelTable& kernels_for(Isa isa);

/// Currently active table. Selection is process-wide.
const KernelTable& kernels();
Isa active_isa();
void set_active_isa(Isa isa);

inline double l2_squared(const float* a, const float* b, std::size_t n) {
    return kernels().l2_squared(a, b, n);
}
inline double dot(const double* a, const double* b, std::size_t n) {
    return kernels().dot_f64(a, b, n);
}

namespace scalar {
double l2_squared(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define DLMI_HAVE_AVX2_KERNELS 1
namespace avx2 {
double l2_squared(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace dlmi::simd
