#include "dlmi/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dlmi::simd {
namespace {

constexpr KernelTable scalar_table{&scalar::l2_squared, &scalar::dot_f64};

#if defined(DLMI_HAVE_AVX2_KERNELS)
constexpr KernelTable avx2_table{&avx2::l2_squared, &avx2::dot_f64};
#endif

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{&kernels_for(detect_isa())};
    return slot;
}

std::atomic<Isa>& active_isa_slot() {
    static std::atomic<Isa> isa{detect_isa()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(DLMI_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa detect_isa() {
    if (const char* forced = std::getenv("DLMI_SIMD"); forced != nullptr) {
        if (std::string_view{forced} == "scalar") {
            return Isa::scalar;
        }
    }
    return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument(
            "SIMD kernels '" + std::string{to_string(isa)} + "' not supported on this CPU"
        );
    }
#if defined(DLMI_HAVE_AVX2_KERNELS)
    if (isa == Isa::avx2) {
        return avx2_table;
    }
#endif
    return scalar_table;
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_relaxed); }

Isa active_isa() { return active_isa_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    const KernelTable& table = kernels_for(isa);
    active_slot().store(&table, std::memory_order_relaxed);
    active_isa_slot().store(isa, std::memory_order_relaxed);
}

}  // namespace dlmi::simd
