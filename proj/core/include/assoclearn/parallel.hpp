#pragma once

#include <cstddef>
#include <functional>

namespace assoclearn {

/// Worker cap: ASSOCLEARN_THREADS if set and positive, otherwise hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs exactly once;
/// callers that need reproducible output write results into per-index slots.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

} // namespace assoclearn
