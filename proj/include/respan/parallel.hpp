#pragma once

#include <cstddef>
#include <functional>

namespace respan {

// Runs fn(0..n-1) across up to `threads` workers. Work items must be
// independent and write disjoint outputs; the index->item mapping is fixed,
// so results cannot depend on the worker count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// CLI --threads value, falling back to the RESPAN_THREADS environment
// variable, then to 1. Values below 1 are clamped to 1.
int resolve_threads(int cli_value);

} // namespace respan
