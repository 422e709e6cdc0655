#pragma once

#include <cstddef>
#include <functional>

namespace storval {

/// Runs fn(0..count-1) on up to `threads` workers (threads <= 1 runs inline,
/// in index order). If any call throws, the exception from the smallest
/// failing index is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int default_thread_count() noexcept;

}  // namespace storval
