#pragma once

#include <cstddef>
#include <functional>

namespace sylverse {

// Worker cap for parallel helpers. Reads SYLVERSE_THREADS once per process;
// unset or unparsable values fall back to the hardware concurrency.
unsigned thread_cap();

// Runs fn(i) for i in [0, count) across at most thread_cap() workers.
// Indices are partitioned into contiguous chunks so callers that write to
// slot i of a preallocated buffer get deterministic, race-free results.
void parallel_for_ordered(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace sylverse
