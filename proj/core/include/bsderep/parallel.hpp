#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bsderep {

/// Fixed chunk width for path-parallel loops. Chunk boundaries never depend on
/// the worker count, so chunk-ordered reductions are bit-identical for any
/// number of jobs.
inline constexpr std::size_t kPathChunk = 4096;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kPathChunk) {
    return (n + chunk - 1) / chunk;
}

/// Runs fn(chunk_index, begin, end) for every chunk of [0, n). Chunks are
/// dealt round-robin to `jobs` threads; jobs <= 1 runs inline.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned jobs, Fn&& fn, std::size_t chunk = kPathChunk) {
    const std::size_t chunks = chunk_count(n, chunk);
    auto run = [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        fn(c, begin, std::min(n, begin + chunk));
    };
    if (jobs <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, chunks));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = w; c < chunks; c += workers) run(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Worker count used when a config leaves `jobs` unset.
unsigned default_jobs();
void set_default_jobs(unsigned jobs);

}  // namespace bsderep
