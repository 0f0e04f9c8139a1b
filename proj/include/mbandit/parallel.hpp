#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mbandit {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work items must not
/// share mutable state; the first exception is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise summation; the result does not depend on thread scheduling.
template <class It>
double pairwise_sum(It first, It last) {
    const auto size = std::distance(first, last);
    if (size <= 8) {
        double total = 0.0;
        for (; first != last; ++first) total += *first;
        return total;
    }
    It middle = first;
    std::advance(middle, size / 2);
    return pairwise_sum(first, middle) + pairwise_sum(middle, last);
}

}  // namespace mbandit
