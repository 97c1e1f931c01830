#pragma once

// Static-partition data parallelism. Work is split into contiguous index
// blocks, so results written per index do not depend on the thread count.

#include <cstddef>
#include <exception>
#include <functional>

namespace mfunc {

// Worker cap: set_thread_count() if called, else $MFUNC_THREADS, else hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

template <class F>
void parallel_for(std::size_t n, F&& body) {
    parallel_for_blocks(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) body(i);
    });
}

}  // namespace mfunc
