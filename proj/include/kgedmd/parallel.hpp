#pragma once

#include <cstddef>
#include <functional>

namespace kgedmd {

/// Worker count from KGEDMD_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
/// handed out dynamically; callers must make results independent of the schedule.
/// The first exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace kgedmd
