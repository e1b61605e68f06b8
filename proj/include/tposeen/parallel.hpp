#ifndef TPOSEEN_PARALLEL_HPP
#define TPOSEEN_PARALLEL_HPP

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tposeen {

/// Thread count: TPOSEEN_THREADS if set, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("TPOSEEN_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? n : 1;
}

/// Deterministic parallel loop: each index is processed independently and
/// writes only to its own slot; no cross-thread reductions.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    unsigned nt = thread_count();
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += nt) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace tposeen

#endif
