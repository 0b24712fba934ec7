#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qmult {

// Process-wide worker count used by the data-parallel loops. 0 selects the
// hardware concurrency. Every parallel loop writes results into per-index
// slots, so the reduction order never depends on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(i) for every i in [0, count). Indices are handed out
// dynamically; body must only touch state owned by index i.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const unsigned workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        try {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace qmult
