/// @file parallel.hpp
/// @brief OpenMP worker pool with bitwise thread-count-independent reductions.
///
/// Every reduction here is specified slab-by-slab: the index space is split
/// into a fixed number of slabs (independent of the worker count), each slab
/// is accumulated serially in index order, and the per-slab partials are
/// combined by a fixed-order pairwise tree. Consequently the result of any
/// sum is identical for 1, 2 or 64 workers. Max reductions are exact anyway.
///
/// Serial reference versions (`*_serial`) of the kernels are kept alongside
/// the parallel ones; tests assert bitwise equality and tools/bench_kernels
/// compares their throughput.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace ulf {

/// Worker cap, read once from ULOCFLOW_THREADS (default: all cores).
int max_threads();

/// Override the worker cap programmatically (used by the CLI and the bench).
void set_max_threads(int n);

/// Parallel loop over [0, n). The body must write to disjoint locations.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

/// Parallel loop over slab index [0, nslabs), body(slab) serial inside.
void parallel_for_slabs(std::int64_t nslabs, const std::function<void(std::int64_t)>& body);

/// Fixed-order pairwise combination of partial sums (deterministic).
double pairwise_combine(std::vector<double>& partials);

/// Sum of body(slab) over slabs; each body call itself must be a serial,
/// index-ordered accumulation. Bitwise independent of the worker count.
double slab_sum(std::int64_t nslabs, const std::function<double(std::int64_t)>& body);
double slab_sum_serial(std::int64_t nslabs, const std::function<double(std::int64_t)>& body);

/// Max of body(slab) over slabs, with the smallest achieving slab index.
struct MaxResult {
    double value;
    std::int64_t arg;
};
MaxResult slab_max(std::int64_t nslabs, const std::function<MaxResult(std::int64_t)>& body);
MaxResult slab_max_serial(std::int64_t nslabs, const std::function<MaxResult(std::int64_t)>& body);

}  // namespace ulf
