#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace ktns {

namespace detail {
inline std::atomic<int>& thread_setting()
{
    static std::atomic<int> threads{1};
    return threads;
}
}  // namespace detail

/// Worker count used by parallel_for. One thread is the default and the
/// bit-reproducible mode.
inline void set_thread_count(int threads) { detail::thread_setting() = std::max(1, threads); }
inline int thread_count() { return detail::thread_setting(); }

/// Runs fn(i) for i in [0, count). Every index writes only its own outputs, so
/// results do not depend on the worker count; reductions happen afterwards in
/// index order.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ktns
