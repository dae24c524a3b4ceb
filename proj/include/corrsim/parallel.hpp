#pragma once

#include <cstddef>
#include <functional>

namespace corrsim {

/// Worker count: CORRSIM_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(worker, begin, end) over contiguous chunks of [0, n). Callers keep
/// per-worker accumulators and reduce them afterwards; results must not depend
/// on the chunking, which holds when every trial derives its own seed.
void parallel_chunks(std::size_t n,
                     const std::function<void(unsigned, std::size_t, std::size_t)>& body);

}  // namespace corrsim
