#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace omot {

// Applies fn to every index in [0, count) across `jobs` worker threads and
// keeps results in index order, so parallel runs merge deterministically.
// The first exception thrown by any worker is rethrown on the caller.
template <typename Result>
std::vector<Result> parallel_map(int count, int jobs, const std::function<Result(int)>& fn) {
    std::vector<Result> results(count);
    jobs = std::max(1, std::min(jobs, count));
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    results[i] = fn(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (std::thread& t : workers) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace omot
