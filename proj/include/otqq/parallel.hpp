#pragma once

#include <cstddef>
#include <functional>

namespace otqq {

/// Worker count from OTQQ_THREADS, else std::thread::hardware_concurrency().
std::size_t thread_count();

/// Calls body(i) for every i < count, spread over thread_count() workers.
/// The first exception thrown by any call is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace otqq
