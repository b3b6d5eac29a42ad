#pragma once

#include <cstddef>
#include <functional>

namespace qdsim {

/// Worker count: QDSIM_THREADS when set (>= 1), otherwise hardware concurrency.
std::size_t thread_count();

/// Calls body(begin, end) over contiguous chunks of [0, n) on up to
/// `threads` workers (0 = thread_count()). Exceptions from any chunk are
/// rethrown on the caller's thread.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t threads = 0);

}  // namespace qdsim
