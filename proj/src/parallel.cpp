#include "qmult/parallel.hpp"

namespace qmult {
namespace {
std::atomic<unsigned> configured_threads{1};
}

void set_thread_count(unsigned n) { configured_threads = n; }

unsigned thread_count() {
    const unsigned n = configured_threads;
    if (n != 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace qmult
