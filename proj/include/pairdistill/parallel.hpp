#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pairdistill {

/// Runs body(block) for every block in [0, blocks) on up to `threads`
/// workers. Blocks are claimed dynamically; callers write results into
/// per-block slots so the outcome is independent of scheduling.
template <typename Body>
void parallel_blocks(std::int64_t blocks, unsigned threads, Body&& body) {
    if (blocks <= 0) return;
    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::int64_t>(threads == 0 ? 1 : threads, 1, blocks));
    if (workers == 1) {
        for (std::int64_t b = 0; b < blocks; ++b) body(b);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::int64_t b = next++; b < blocks; b = next++) {
            try {
                body(b);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = blocks;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace pairdistill
