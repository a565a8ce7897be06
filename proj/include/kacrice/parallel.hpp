#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace kacrice {

/// Seed of task `index` in a run with master seed `master`; independent of worker count.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Number of workers: hardware concurrency, capped by KACRICE_THREADS when set.
[[nodiscard]] unsigned worker_count();

/// Evaluate fn(0..n-1) on worker threads and return the results in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn);

namespace detail {
void run_parallel(std::size_t n, const std::function<void(std::size_t)>& body);
}

template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    detail::run_parallel(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace kacrice
