#include "ulf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ulf {

namespace {
std::atomic<int> g_thread_cap{0};

int detect_threads() {
    if (const char* env = std::getenv("ULOCFLOW_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}
}  // namespace

int max_threads() {
    int cap = g_thread_cap.load(std::memory_order_relaxed);
    if (cap == 0) {
        cap = detect_threads();
        g_thread_cap.store(cap, std::memory_order_relaxed);
    }
    return cap;
}

void set_max_threads(int n) { g_thread_cap.store(std::max(1, n), std::memory_order_relaxed); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    const int nt = max_threads();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) body(i);
#else
    (void)nt;
    for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

void parallel_for_slabs(std::int64_t nslabs, const std::function<void(std::int64_t)>& body) {
    parallel_for(nslabs, body);
}

double pairwise_combine(std::vector<double>& partials) {
    if (partials.empty()) return 0.0;
    std::size_t n = partials.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) partials[i] += partials[i + half];
        n = half;
    }
    return partials[0];
}

double slab_sum(std::int64_t nslabs, const std::function<double(std::int64_t)>& body) {
    std::vector<double> partials(static_cast<std::size_t>(nslabs), 0.0);
    parallel_for_slabs(nslabs, [&](std::int64_t s) { partials[static_cast<std::size_t>(s)] = body(s); });
    return pairwise_combine(partials);
}

double slab_sum_serial(std::int64_t nslabs, const std::function<double(std::int64_t)>& body) {
    std::vector<double> partials(static_cast<std::size_t>(nslabs), 0.0);
    for (std::int64_t s = 0; s < nslabs; ++s) partials[static_cast<std::size_t>(s)] = body(s);
    return pairwise_combine(partials);
}

namespace {
MaxResult combine_max(const std::vector<MaxResult>& partials) {
    MaxResult best{-1e308, -1};
    for (const auto& p : partials) {
        if (p.arg < 0) continue;
        if (p.value > best.value || best.arg < 0) best = p;
    }
    return best;
}
}  // namespace

MaxResult slab_max(std::int64_t nslabs, const std::function<MaxResult(std::int64_t)>& body) {
    std::vector<MaxResult> partials(static_cast<std::size_t>(nslabs), MaxResult{-1e308, -1});
    parallel_for_slabs(nslabs, [&](std::int64_t s) { partials[static_cast<std::size_t>(s)] = body(s); });
    return combine_max(partials);
}

MaxResult slab_max_serial(std::int64_t nslabs, const std::function<MaxResult(std::int64_t)>& body) {
    std::vector<MaxResult> partials(static_cast<std::size_t>(nslabs), MaxResult{-1e308, -1});
    for (std::int64_t s = 0; s < nslabs; ++s) partials[static_cast<std::size_t>(s)] = body(s);
    return combine_max(partials);
}

}  // namespace ulf
