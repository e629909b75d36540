#ifndef MALEX_PARALLEL_HPP
#define MALEX_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace malex {

inline std::size_t default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Runs body(i) for i in [0, n). Work items must be independent; results are
// written into index-addressed slots by the caller, so the reduction order
// (and therefore any serialized output) does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::size_t k = workers < n ? workers : n;
    pool.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace malex

#endif  // MALEX_PARALLEL_HPP
