/// @file bench_kernels.cpp
/// @brief Throughput comparison of the OpenMP kernels against their serial
///        reference twins. Median of repeated runs, one table row per kernel.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "ulf/kernels_core.hpp"
#include "ulf/norms.hpp"
#include "ulf/parallel.hpp"

using namespace ulf;

namespace {

double median_ms(const std::function<void()>& fn, int reps) {
    std::vector<double> samples;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
    int N = 64;
    int reps = 7;
    if (argc > 1) N = std::atoi(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);

    const Grid g = N >= 64 ? Grid::make(N, 8.0) : Grid::make_unchecked(N, 8.0);
    const auto nn = static_cast<std::size_t>(g.num_nodes());
    RealVec a(nn), b(nn), c(nn), out(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        a[i] = std::sin(0.01 * static_cast<double>(i));
        b[i] = std::cos(0.003 * static_cast<double>(i));
        c[i] = 1.0 / (1.0 + 0.001 * static_cast<double>(i));
    }
    const auto probes = probe_lattice(g, 0.5);
    const auto& stencil = g.ball_stencil(1.0);
    std::vector<double> sweep_out;

    std::printf("N=%d, %lld nodes, %d workers (ULOCFLOW_THREADS caps)\n", N,
                static_cast<long long>(g.num_nodes()), max_threads());
    std::printf("%-22s %12s %12s %8s\n", "kernel", "serial[ms]", "openmp[ms]", "speedup");

    struct Row {
        const char* name;
        std::function<void()> serial, par;
    };
    const std::vector<Row> rows = {
        {"nodewise_multiply", [&] { core::nodewise_multiply_serial(out, a, b); },
         [&] { core::nodewise_multiply(out, a, b); }},
        {"nodewise_multiply3", [&] { core::nodewise_multiply3_serial(out, a, b, c); },
         [&] { core::nodewise_multiply3(out, a, b, c); }},
        {"axpby", [&] { core::axpby_serial(0.3, a, 0.7, out); },
         [&] { core::axpby(0.3, a, 0.7, out); }},
        {"field_sum", [&] { (void)core::field_sum_serial(a, 64); },
         [&] { (void)core::field_sum(a, 64); }},
        {"field_max_abs", [&] { (void)core::field_max_abs_serial(a, 64); },
         [&] { (void)core::field_max_abs(a, 64); }},
        {"ball_pow_sweep_q2", [&] { core::ball_pow_sweep_serial(g, a, probes, stencil, 2.0, sweep_out); },
         [&] { core::ball_pow_sweep(g, a, probes, stencil, 2.0, sweep_out); }},
        {"ball_pow_sweep_max", [&] { core::ball_pow_sweep_serial(g, a, probes, stencil, 0.0, sweep_out); },
         [&] { core::ball_pow_sweep(g, a, probes, stencil, 0.0, sweep_out); }},
    };
    for (const auto& r : rows) {
        const double ts = median_ms(r.serial, reps);
        const double tp = median_ms(r.par, reps);
        std::printf("%-22s %12.3f %12.3f %8.2fx\n", r.name, ts, tp, ts / tp);
    }
    return 0;
}
