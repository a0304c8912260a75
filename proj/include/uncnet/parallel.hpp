#pragma once

#include <cstddef>
#include <functional>

namespace uncnet {

// Worker count: explicit argument > UNCNET_THREADS env > hardware concurrency.
int resolve_thread_count(int requested = 0);

// Runs fn(0..count-1) across up to `threads` workers. Exceptions propagate
// (first one wins). Work items must not share mutable state.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

} // namespace uncnet
