#pragma once

#include <cstddef>
#include <functional>

namespace spoofguard {

/// 0 means "hardware concurrency" (at least 1).
std::size_t resolve_threads(std::size_t requested);

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Callers write
/// results by index, so output does not depend on scheduling. After a
/// failure no new indices start; once workers stop, the exception with the
/// lowest index among those that ran is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace spoofguard
