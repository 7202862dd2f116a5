#include "dlmi/util/parallel.hpp"

#include <atomic>

namespace dlmi {
namespace {
std::atomic<std::size_t> configured_threads{0};
}

void set_thread_count(std::size_t n) { configured_threads.store(n); }

std::size_t thread_count() {
    const std::size_t n = configured_threads.load();
    if (n != 0) {
        return n;
    }
    return std::max<unsigned>(1U, std::thread::hardware_concurrency());
}

}  // namespace dlmi
