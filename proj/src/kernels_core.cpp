#include "ulf/kernels_core.hpp"

#include <cmath>

#include "ulf/parallel.hpp"

namespace ulf::core {

namespace {
// One slab = one contiguous chunk; slab boundaries depend only on nslabs.
struct SlabRange {
    std::int64_t begin, end;
};
SlabRange slab_range(std::int64_t n, int nslabs, std::int64_t s) {
    const std::int64_t chunk = (n + nslabs - 1) / nslabs;
    const std::int64_t b = s * chunk;
    return {b, std::min(n, b + chunk)};
}
}  // namespace

void nodewise_multiply(RealVec& out, const RealVec& a, const RealVec& b) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    out.resize(a.size());
    parallel_for_slabs(64, [&](std::int64_t s) {
        const auto [lo, hi] = slab_range(n, 64, s);
        for (std::int64_t i = lo; i < hi; ++i) out[i] = a[i] * b[i];
    });
}

void nodewise_multiply_serial(RealVec& out, const RealVec& a, const RealVec& b) {
    out.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void nodewise_multiply3(RealVec& out, const RealVec& a, const RealVec& b, const RealVec& c) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    out.resize(a.size());
    parallel_for_slabs(64, [&](std::int64_t s) {
        const auto [lo, hi] = slab_range(n, 64, s);
        for (std::int64_t i = lo; i < hi; ++i) out[i] = a[i] * b[i] * c[i];
    });
}

void nodewise_multiply3_serial(RealVec& out, const RealVec& a, const RealVec& b, const RealVec& c) {
    out.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i] * c[i];
}

void axpby(double alpha, const RealVec& x, double beta, RealVec& y) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    parallel_for_slabs(64, [&](std::int64_t s) {
        const auto [lo, hi] = slab_range(n, 64, s);
        for (std::int64_t i = lo; i < hi; ++i) y[i] = alpha * x[i] + beta * y[i];
    });
}

void axpby_serial(double alpha, const RealVec& x, double beta, RealVec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = alpha * x[i] + beta * y[i];
}

double field_sum(const RealVec& a, int nslabs) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    return slab_sum(nslabs, [&](std::int64_t s) {
        const auto [lo, hi] = slab_range(n, nslabs, s);
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) acc += a[i];
        return acc;
    });
}

double field_sum_serial(const RealVec& a, int nslabs) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    return slab_sum_serial(nslabs, [&](std::int64_t s) {
        const auto [lo, hi] = slab_range(n, nslabs, s);
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) acc += a[i];
        return acc;
    });
}

namespace {
MaxResult max_abs_slab(const RealVec& a, std::int64_t n, int nslabs, std::int64_t s) {
    const auto [lo, hi] = slab_range(n, nslabs, s);
    MaxResult r{-1e308, -1};
    for (std::int64_t i = lo; i < hi; ++i) {
        const double v = std::abs(a[i]);
        if (v > r.value) r = {v, i};
    }
    return r;
}
}  // namespace

double field_max_abs(const RealVec& a, int nslabs) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    if (n == 0) return 0.0;
    return slab_max(nslabs, [&](std::int64_t s) { return max_abs_slab(a, n, nslabs, s); }).value;
}

double field_max_abs_serial(const RealVec& a, int nslabs) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    if (n == 0) return 0.0;
    return slab_max_serial(nslabs, [&](std::int64_t s) { return max_abs_slab(a, n, nslabs, s); }).value;
}

void spectral_scale(CplxVec& out, const CplxVec& spec, const RealVec& sym) {
    const std::int64_t n = static_cast<std::int64_t>(spec.size());
    out.resize(spec.size());
    parallel_for_slabs(64, [&](std::int64_t s) {
        const auto [lo, hi] = slab_range(n, 64, s);
        for (std::int64_t i = lo; i < hi; ++i) out[i] = spec[i] * sym[i];
    });
}

void spectral_scale_serial(CplxVec& out, const CplxVec& spec, const RealVec& sym) {
    out.resize(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i] * sym[i];
}

namespace {
double ball_pow_at(const Grid& g, const RealVec& absfield, const std::array<int, 3>& probe,
                   const std::vector<std::array<int, 3>>& stencil, double p) {
    const int n = g.n();
    const bool is_two = (p == 2.0);
    const bool is_one = (p == 1.0);
    double acc = 0.0;
    double mx = 0.0;
    for (const auto& d : stencil) {
        int ix = probe[0] + d[0];
        int iy = probe[1] + d[1];
        int iz = probe[2] + d[2];
        ix -= n & -(ix >= n); ix += n & -(ix < 0);
        iy -= n & -(iy >= n); iy += n & -(iy < 0);
        iz -= n & -(iz >= n); iz += n & -(iz < 0);
        const double v = absfield[static_cast<std::size_t>(g.index(ix, iy, iz))];
        if (p == 0.0) {
            if (v > mx) mx = v;
        } else if (is_two) {
            acc += v * v;
        } else if (is_one) {
            acc += v;
        } else {
            acc += std::pow(v, p);
        }
    }
    return p == 0.0 ? mx : acc;
}
}  // namespace

void ball_pow_sweep(const Grid& g, const RealVec& absfield,
                    const std::vector<std::array<int, 3>>& probes,
                    const std::vector<std::array<int, 3>>& stencil, double p,
                    std::vector<double>& out) {
    out.resize(probes.size());
    parallel_for(static_cast<std::int64_t>(probes.size()), [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] =
            ball_pow_at(g, absfield, probes[static_cast<std::size_t>(i)], stencil, p);
    });
}

void ball_pow_sweep_serial(const Grid& g, const RealVec& absfield,
                           const std::vector<std::array<int, 3>>& probes,
                           const std::vector<std::array<int, 3>>& stencil, double p,
                           std::vector<double>& out) {
    out.resize(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i)
        out[i] = ball_pow_at(g, absfield, probes[i], stencil, p);
}

}  // namespace ulf::core
