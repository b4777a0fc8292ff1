#pragma once

#include <cstddef>
#include <functional>

namespace voi {

/// Number of worker threads used by parallel loops. 0 selects the hardware
/// concurrency. Results never depend on this value: every loop writes to
/// per-index slots and reductions are done serially by the caller.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Calls body(begin, end) on disjoint chunks covering [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace voi
