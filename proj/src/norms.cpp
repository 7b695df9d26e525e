#include "ulf/norms.hpp"

#include <cmath>
#include <sstream>

#include "ulf/kernels_core.hpp"
#include "ulf/parallel.hpp"
#include "ulf/spectral.hpp"

namespace ulf {

std::vector<std::array<int, 3>> probe_lattice(const Grid& g, double stride) {
    const int every = stride <= 0.0 ? 1 : std::max(1, static_cast<int>(std::round(stride / g.spacing())));
    std::vector<std::array<int, 3>> probes;
    const int n = g.n();
    for (int ix = 0; ix < n; ix += every)
        for (int iy = 0; iy < n; iy += every)
            for (int iz = 0; iz < n; iz += every) probes.push_back({ix, iy, iz});
    return probes;
}

RealVec magnitude_field(const ScalarField& f) {
    RealVec out(f.data().size());
    parallel_for(static_cast<std::int64_t>(out.size()),
                 [&](std::int64_t i) { out[static_cast<std::size_t>(i)] = std::abs(f[i]); });
    return out;
}

RealVec magnitude_field(const VectorField& f) {
    RealVec out(f.comp(0).size());
    parallel_for(static_cast<std::int64_t>(out.size()),
                 [&](std::int64_t i) { out[static_cast<std::size_t>(i)] = f.magnitude(i); });
    return out;
}

namespace {

NormReport sup_ball_norm(const Grid& g, const RealVec& mag, double q, double stride,
                         const char* name) {
    const auto probes = probe_lattice(g, stride);
    const auto& stencil = g.ball_stencil(1.0);
    std::vector<double> vals;
    core::ball_pow_sweep(g, mag, probes, stencil, q == kInf ? 0.0 : q, vals);
    const double h3 = std::pow(g.spacing(), 3.0);
    NormReport rep;
    rep.name = name;
    rep.q = q;
    rep.n_centers = probes.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (vals[i] > vals[best]) best = i;
    rep.value = q == kInf ? vals[best] : std::pow(vals[best] * h3, 1.0 / q);
    const auto& p = probes[best];
    rep.witness = {g.coord(p[0]), g.coord(p[1]), g.coord(p[2])};
    return rep;
}

}  // namespace

NormReport lq_uloc(const ScalarField& f, double q, double stride) {
    return sup_ball_norm(f.grid(), magnitude_field(f), q, stride, "lq_uloc");
}

NormReport lq_uloc(const VectorField& f, double q, double stride) {
    return sup_ball_norm(f.grid(), magnitude_field(f), q, stride, "lq_uloc");
}

NormReport usp_from_magnitudes(const Grid& g, const std::vector<const RealVec*>& mags,
                               const std::vector<double>& weights, double s, double p,
                               double stride) {
    const auto probes = probe_lattice(g, stride);
    const auto& stencil = g.ball_stencil(1.0);
    const double h3 = std::pow(g.spacing(), 3.0);
    std::vector<double> acc(probes.size(), 0.0);
    std::vector<double> vals;
    for (std::size_t m = 0; m < mags.size(); ++m) {
        core::ball_pow_sweep(g, *mags[m], probes, stencil, p == kInf ? 0.0 : p, vals);
        parallel_for(static_cast<std::int64_t>(probes.size()), [&](std::int64_t i) {
            const auto k = static_cast<std::size_t>(i);
            const double ball_norm = p == kInf ? vals[k] : std::pow(vals[k] * h3, 1.0 / p);
            if (s == kInf)
                acc[k] = std::max(acc[k], ball_norm);
            else
                acc[k] += weights[m] * std::pow(ball_norm, s);
        });
    }
    NormReport rep;
    rep.name = "usp";
    rep.s = s;
    rep.q = p;
    rep.n_centers = probes.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < acc.size(); ++i)
        if (acc[i] > acc[best]) best = i;
    rep.value = s == kInf ? acc[best] : std::pow(acc[best], 1.0 / s);
    const auto& pr = probes[best];
    rep.witness = {g.coord(pr[0]), g.coord(pr[1]), g.coord(pr[2])};
    return rep;
}

NormReport usp_norm(const Trajectory& traj, double s, double p, double t0, double t1,
                    double stride) {
    const auto [first, last] = traj.window(t0, t1);
    std::vector<RealVec> mags;
    mags.reserve(last - first + 1);
    for (std::size_t i = first; i <= last; ++i) mags.push_back(magnitude_field(traj.snapshot(i)));
    std::vector<const RealVec*> ptrs;
    for (const auto& m : mags) ptrs.push_back(&m);
    const auto weights = trapezoid_weights(traj.times(), first, last);
    NormReport rep = usp_from_magnitudes(traj.grid(), ptrs, weights, s, p, stride);
    rep.t0 = t0;
    rep.t1 = t1;
    return rep;
}

NormReport energy_norm(const Trajectory& traj, double t0, double t1, double stride) {
    const auto [first, last] = traj.window(t0, t1);
    std::vector<RealVec> vmags, gmags;
    for (std::size_t i = first; i <= last; ++i) {
        vmags.push_back(magnitude_field(traj.snapshot(i)));
        const TensorField gv = gradient(traj.snapshot(i));
        RealVec gm(vmags.back().size());
        parallel_for(static_cast<std::int64_t>(gm.size()), [&](std::int64_t k) {
            double acc = 0.0;
            for (int c = 0; c < 9; ++c) {
                const double v = gv.comp(c)[static_cast<std::size_t>(k)];
                acc += v * v;
            }
            gm[static_cast<std::size_t>(k)] = std::sqrt(acc);
        });
        gmags.push_back(std::move(gm));
    }
    std::vector<const RealVec*> vptr, gptr;
    for (const auto& m : vmags) vptr.push_back(&m);
    for (const auto& m : gmags) gptr.push_back(&m);
    const auto weights = trapezoid_weights(traj.times(), first, last);

    NormReport a = usp_from_magnitudes(traj.grid(), vptr, weights, kInf, 2.0, stride);
    NormReport b = usp_from_magnitudes(traj.grid(), gptr, weights, 2.0, 2.0, stride);
    NormReport rep;
    rep.name = "energy";
    rep.t0 = t0;
    rep.t1 = t1;
    rep.value = a.value + b.value;
    rep.summand_a = a.value;
    rep.summand_b = b.value;
    rep.witness = a.witness;
    rep.n_centers = a.n_centers;
    return rep;
}

namespace {

TailProfile tail_profile_mag(const Grid& g, const RealVec& mag, double q,
                             const std::vector<double>& R_list, double threshold_rel) {
    const auto all = probe_lattice(g, 0.5);
    const auto& stencil = g.ball_stencil(1.0);
    const double h3 = std::pow(g.spacing(), 3.0);
    TailProfile prof;
    for (double R : R_list) {
        std::vector<std::array<int, 3>> probes;
        for (const auto& p : all) {
            const double x = g.coord(p[0]), y = g.coord(p[1]), z = g.coord(p[2]);
            const double dx = g.min_image(x), dy = g.min_image(y), dz = g.min_image(z);
            if (dx * dx + dy * dy + dz * dz >= R * R) probes.push_back(p);
        }
        double v = 0.0;
        if (!probes.empty()) {
            std::vector<double> vals;
            core::ball_pow_sweep(g, mag, probes, stencil, q == kInf ? 0.0 : q, vals);
            for (double x : vals) v = std::max(v, x);
            if (q != kInf) v = std::pow(v * h3, 1.0 / q);
        }
        prof.points.push_back({R, v});
    }
    prof.monotone = true;
    for (std::size_t i = 1; i < prof.points.size(); ++i)
        if (prof.points[i].value > prof.points[i - 1].value * (1.0 + 1e-12)) prof.monotone = false;
    const double head = prof.points.empty() ? 0.0 : prof.points.front().value;
    const double tail = prof.points.empty() ? 0.0 : prof.points.back().value;
    prof.decayed = prof.monotone && (tail <= threshold_rel * head + 1e-14);
    return prof;
}

}  // namespace

TailProfile tail_profile(const VectorField& f, double q, const std::vector<double>& R_list,
                         double threshold_rel) {
    return tail_profile_mag(f.grid(), magnitude_field(f), q, R_list, threshold_rel);
}

TailProfile tail_profile(const ScalarField& f, double q, const std::vector<double>& R_list,
                         double threshold_rel) {
    return tail_profile_mag(f.grid(), magnitude_field(f), q, R_list, threshold_rel);
}

ScalarField mollify(const ScalarField& f, double eps) {
    return Mollifier::make(f.grid(), eps).apply(f);
}

VectorField mollify(const VectorField& f, double eps) {
    return Mollifier::make(f.grid(), eps).apply(f);
}

VectorField multiply(const VectorField& v, const ScalarField& chi) {
    VectorField out(v.grid(), v.time());
    for (int c = 0; c < 3; ++c) core::nodewise_multiply(out.comp(c), v.comp(c), chi.data());
    return out;
}

UspCounterexample usp_counterexample(const Grid& g, double s, double p, double t0, double t,
                                     int K) {
    if (s < 1.0 || s == kInf) throw ValidationError("usp_counterexample: need 1 <= s < inf");
    if (t0 + std::pow(2.0, -1.0) > t)
        throw ValidationError("usp_counterexample: need t0 + 1/2 <= t");

    // Centers with disjoint unit balls on a coarse sub-lattice away from
    // the seam, aligned to the stride-1/2 probe lattice so the sup sits
    // exactly on the ball centers.
    std::vector<Vec3> centers;
    const double L = g.half_length();
    auto snap = [&](double x) { return g.coord(g.wrap_node(std::round(x * 2.0) / 2.0)); };
    const double lo = -L + 2.0;
    for (double x = lo; x <= L - 1.5 && static_cast<int>(centers.size()) < K; x += 2.5)
        for (double y = lo; y <= L - 1.5 && static_cast<int>(centers.size()) < K; y += 2.5)
            for (double z = lo; z <= L - 1.5 && static_cast<int>(centers.size()) < K; z += 2.5)
                centers.push_back({snap(x), snap(y), snap(z)});
    if (static_cast<int>(centers.size()) < K)
        throw ValidationError("usp_counterexample: K disjoint unit balls do not fit in the box");

    const auto& st = g.ball_stencil(1.0);
    const double h3 = std::pow(g.spacing(), 3.0);
    UspCounterexample out;
    out.c_p_discrete = p == kInf ? 1.0 : static_cast<double>(st.size()) * h3;

    // Field on the dyadic slab (t_{k+1}, t_k): balls 1..k are active.
    auto slab_field = [&](int k) {
        ScalarField u(g);
        for (int j = 1; j <= k; ++j) {
            const auto& c = centers[static_cast<std::size_t>(j - 1)];
            const int cx = g.wrap_node(c[0]), cy = g.wrap_node(c[1]), cz = g.wrap_node(c[2]);
            const double amp = std::pow(2.0, static_cast<double>(j) / s);
            const int n = g.n();
            for (const auto& d : st) {
                const int ix = ((cx + d[0]) % n + n) % n;
                const int iy = ((cy + d[1]) % n + n) % n;
                const int iz = ((cz + d[2]) % n + n) % n;
                u[g.index(ix, iy, iz)] = amp;
            }
        }
        return u;
    };

    // L^s(t0,t;L^p_uloc) partial sums by exact dyadic-slab integration.
    double run = 0.0;
    for (int k = 1; k < K; ++k) {
        const double len = std::pow(2.0, -k) - std::pow(2.0, -(k + 1));
        const ScalarField u = slab_field(k);
        const double uloc = lq_uloc(u, p).value;
        const double inc = len * std::pow(uloc, s);
        out.increments.push_back(inc);
        run += inc;
        out.partial_sums.push_back(run);
    }

    // U^{s,p}: per-center exact time integral, then sup over centers.
    double best = 0.0;
    const auto probes = probe_lattice(g, 0.5);
    std::vector<double> acc(probes.size(), 0.0);
    std::vector<double> vals;
    for (int k = 1; k <= K; ++k) {
        const double slab_len =
            (k == K) ? std::pow(2.0, -K) : std::pow(2.0, -k) - std::pow(2.0, -(k + 1));
        const ScalarField u = slab_field(k == K ? K : k);
        const RealVec mag = magnitude_field(u);
        core::ball_pow_sweep(g, mag, probes, st, p == kInf ? 0.0 : p, vals);
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const double bn = p == kInf ? vals[i] : std::pow(vals[i] * h3, 1.0 / p);
            acc[i] += slab_len * std::pow(bn, s);
        }
    }
    for (double a : acc) best = std::max(best, a);
    out.usp_value = std::pow(best, 1.0 / s);
    return out;
}

}  // namespace ulf
