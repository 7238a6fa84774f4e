#pragma once
#include <cstddef>
#include <functional>

namespace ambientlab {

// Worker count taken from --jobs, AMBIENTLAB_JOBS, or hardware concurrency.
int jobs();
void set_jobs(int n);

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks whose
// boundaries depend only on n and the job count, never on timing, so callers
// that reduce per-chunk partials in index order stay bit-reproducible for any
// worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn);

// Convenience wrapper calling fn per index.
void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ambientlab
