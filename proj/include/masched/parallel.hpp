#pragma once

#include <cstddef>
#include <functional>

namespace masched {

// Worker count for `requested` (0 = hardware concurrency, at least 1).
unsigned resolve_workers(unsigned requested) noexcept;

// Calls fn(worker, i) for every i in [0, n) using `workers` threads that pull
// indices in small chunks. The first exception thrown is rethrown after all
// threads joined. With one worker everything runs on the calling thread.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(unsigned, std::size_t)>& fn);

}  // namespace masched
