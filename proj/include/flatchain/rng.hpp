#pragma once

#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace flatchain {

/// splitmix64 finalizer; derives independent per-task seeds from one seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(split_seed(seed, stream));
}

/// Runs body(i) for i in [0, n) on up to `threads` threads. Results must be
/// written to per-index slots by the caller so the reduction order stays
/// fixed.
template <class F>
void parallel_for(int n, int threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    threads = std::min(threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += threads) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace flatchain
