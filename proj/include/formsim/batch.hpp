#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "formsim/scenario.hpp"

namespace formsim {

/// Run every run index of `config` on up to `parallelism` threads.
/// Traces come back indexed by run, independent of scheduling.
inline std::vector<RunTrace> run_batch(const ExperimentConfig& config, std::size_t parallelism = 1) {
    std::vector<RunTrace> traces(config.runs);
    const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, config.runs);
    if (workers == 1) {
        for (std::size_t r = 0; r < config.runs; ++r) traces[r] = run_simulation(config, r);
        return traces;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < config.runs; r = next++) {
                    try {
                        traces[r] = run_simulation(config, r);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return traces;
}

}  // namespace formsim
