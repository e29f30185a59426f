#pragma once

#include <cstddef>
#include <functional>

namespace bitcap {

// Worker count: BITCAP_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
unsigned default_threads();

// Runs fn(i) for i in [0, n) on up to `threads` workers, each taking a
// contiguous block. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace bitcap
