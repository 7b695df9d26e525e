#include "ulf/pressure.hpp"

#include <cmath>

#include "ulf/cutoff.hpp"
#include "ulf/kernels_core.hpp"
#include "ulf/norms.hpp"
#include "ulf/parallel.hpp"
#include "ulf/spectral.hpp"

namespace ulf {

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

TensorField outer_product(const VectorField& v) {
    TensorField N(v.grid(), v.time());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) core::nodewise_multiply(N.comp(i, j), v.comp(i), v.comp(j));
    return N;
}

inline std::array<int, 3> wrap_add(const Grid& g, const std::array<int, 3>& a,
                                   const std::array<int, 3>& d) {
    const int n = g.n();
    return {((a[0] + d[0]) % n + n) % n, ((a[1] + d[1]) % n + n) % n, ((a[2] + d[2]) % n + n) % n};
}

// L^{3/2} norm over the ball-cylinder from per-time LocalBall samples.
double l32_cylinder(const Grid& g, const std::vector<LocalBall>& balls,
                    const std::vector<double>& times) {
    if (balls.empty()) return 0.0;
    const double h3 = std::pow(g.spacing(), 3.0);
    std::vector<double> per_time;
    for (const auto& b : balls) {
        double acc = 0.0;
        for (double v : b.values) acc += std::pow(std::abs(v), 1.5);
        per_time.push_back(acc * h3);
    }
    if (times.size() < 2) return std::pow(per_time[0], 1.0 / 1.5);
    double integral = 0.0;
    for (std::size_t m = 0; m + 1 < times.size(); ++m)
        integral += 0.5 * (times[m + 1] - times[m]) * (per_time[m] + per_time[m + 1]);
    return std::pow(integral, 1.0 / 1.5);
}

}  // namespace

std::vector<ScalarField> pressure_spectral(const std::vector<TensorField>& N) {
    std::vector<ScalarField> out;
    out.reserve(N.size());
    for (const auto& Nm : N) out.push_back(poisson_pressure(Nm));
    return out;
}

LocalBall local_pressure_three_term(const TensorField& N, const Vec3& x0, double* tail) {
    const Grid& g = N.grid();
    LocalBall eval = make_local_ball(g, x0, 1.5);
    // -(1/3) tr N at the evaluation nodes
    const auto& offs = *eval.offsets;
    for (std::size_t e = 0; e < offs.size(); ++e) {
        const auto xn = wrap_add(g, eval.node, offs[e]);
        const std::int64_t idx = g.index(xn[0], xn[1], xn[2]);
        double tr = 0.0;
        for (int i = 0; i < 3; ++i) tr += N.comp(i, i)[static_cast<std::size_t>(idx)];
        eval.values[e] = -tr / 3.0;
    }
    riesz_pv_tensor_near(N, eval, 2.0);
    const double tb = riesz_far_difference(N, eval, 2.0);
    if (tail) *tail = tb;
    return eval;
}

namespace {

PressureReport phat_impl(const Trajectory& v_traj,
                         const std::function<TensorField(std::size_t)>& tensor_at,
                         const Vec3& x0, std::vector<std::size_t> tidx) {
    if (tidx.empty()) tidx = all_indices(v_traj.size());
    PressureReport rep;
    rep.x0 = x0;
    for (std::size_t m : tidx) {
        const TensorField N = tensor_at(m);
        double tail = 0.0;
        rep.local.push_back(local_pressure_three_term(N, x0, &tail));
        rep.tail_bound.push_back(tail);
        rep.times.push_back(v_traj.times()[m]);
    }
    rep.l32_norm = l32_cylinder(v_traj.grid(), rep.local, rep.times);
    const double t0 = rep.times.front();
    const double t1 = rep.times.back();
    const double u33 =
        t1 > t0 ? usp_norm(v_traj, 3.0, 3.0, t0, t1).value
                : lq_uloc(v_traj.snapshot(tidx.front()), 3.0).value;
    rep.v_u33_sq = u33 * u33;
    rep.ratio = rep.v_u33_sq > 0.0 ? rep.l32_norm / rep.v_u33_sq : 0.0;
    return rep;
}

}  // namespace

PressureReport phat_local(const Trajectory& v_traj, const Vec3& x0, std::vector<std::size_t> tidx) {
    return phat_impl(
        v_traj, [&](std::size_t m) { return outer_product(v_traj.snapshot(m)); }, x0, tidx);
}

PressureReport phat_local_tensor(const Trajectory& v_traj, const std::vector<TensorField>& N,
                                 const Vec3& x0, std::vector<std::size_t> tidx) {
    if (N.size() != v_traj.size())
        throw ValidationError("phat_local_tensor: one tensor per snapshot required");
    return phat_impl(
        v_traj, [&](std::size_t m) { return N[m]; }, x0, tidx);
}

PressureReport decomposition_check(const std::vector<ScalarField>& p, const Trajectory& v_traj,
                                   const Vec3& x0, double tol_press, std::vector<std::size_t> tidx,
                                   const std::vector<TensorField>* N_moll) {
    if (p.size() != v_traj.size())
        throw ValidationError("decomposition_check: one pressure snapshot per time required");
    if (tidx.empty()) tidx = all_indices(v_traj.size());
    const Grid& g = v_traj.grid();

    PressureReport rep =
        N_moll ? phat_local_tensor(v_traj, *N_moll, x0, tidx) : phat_local(v_traj, x0, tidx);
    rep.tol = tol_press * (1.0 + rep.v_u33_sq);

    bool pass = true;
    for (std::size_t s = 0; s < tidx.size(); ++s) {
        const auto& ball = rep.local[s];
        const ScalarField& ps = p[tidx[s]];
        double vmin = kInf, vmax = -kInf, mean = 0.0;
        const auto& offs = *ball.offsets;
        for (std::size_t e = 0; e < offs.size(); ++e) {
            const auto xn = wrap_add(g, ball.node, offs[e]);
            const double d = ps[g.index(xn[0], xn[1], xn[2])] - ball.values[e];
            vmin = std::min(vmin, d);
            vmax = std::max(vmax, d);
            mean += d;
        }
        mean /= static_cast<double>(offs.size());
        rep.c_series.push_back(mean);
        rep.variance.push_back(vmax - vmin);
        if (vmax - vmin > rep.tol) pass = false;
    }
    rep.pass = pass;
    return rep;
}

std::vector<double> cx0_direct(const Trajectory& v_traj, const Vec3& x0, int n_dyadic,
                               std::vector<std::size_t> tidx) {
    const Grid& g = v_traj.grid();
    const double Rn = std::pow(2.0, n_dyadic);
    const double R2n = 2.0 * Rn;
    const double x0n = std::sqrt(x0[0] * x0[0] + x0[1] * x0[1] + x0[2] * x0[2]);
    if (x0n + 1.5 > Rn || Rn > g.half_length() + 1e-12)
        throw ValidationError("cx0_direct: need B(x0,3/2) in B_{2^n} in the box");
    if (tidx.empty()) tidx = all_indices(v_traj.size());

    const LocalBall anchor = make_local_ball(g, x0, 1.5);
    const Vec3 xs = anchor.x0;

    std::vector<double> series;
    for (std::size_t m : tidx) {
        const TensorField N = outer_product(v_traj.snapshot(m));
        const std::int64_t nodes = g.num_nodes();
        const double h3 = std::pow(g.spacing(), 3.0);
        const double val = slab_sum(64, [&](std::int64_t slab) {
            const std::int64_t chunk = (nodes + 63) / 64;
            const std::int64_t lo = slab * chunk;
            const std::int64_t hi = std::min(nodes, lo + chunk);
            double acc = 0.0;
            double K1[3][3], K2[3][3];
            for (std::int64_t idx = lo; idx < hi; ++idx) {
                const Vec3 y = g.node(idx);
                const Vec3 ym = g.min_image(y, {0.0, 0.0, 0.0});
                const double yn = std::sqrt(ym[0] * ym[0] + ym[1] * ym[1] + ym[2] * ym[2]);
                const Vec3 zx = g.min_image(xs, y);
                const double zxn = std::sqrt(zx[0] * zx[0] + zx[1] * zx[1] + zx[2] * zx[2]);
                double contrib = 0.0;
                if (yn < R2n) {
                    // T1: B_{2^{n+1}} \ B(x0,2) with kernel at x0
                    if (zxn > 2.0) {
                        riesz_Kij(zx, K1);
                        for (int i = 0; i < 3; ++i)
                            for (int j = 0; j < 3; ++j)
                                contrib += K1[i][j] * N.comp(i, j)[static_cast<std::size_t>(idx)];
                    }
                    // T2: - B_{2^{n+1}} \ B_2 with kernel at the origin
                    if (yn > 2.0) {
                        riesz_Kij({-ym[0], -ym[1], -ym[2]}, K2);
                        for (int i = 0; i < 3; ++i)
                            for (int j = 0; j < 3; ++j)
                                contrib -= K2[i][j] * N.comp(i, j)[static_cast<std::size_t>(idx)];
                    }
                } else {
                    // T3: the common far region with the difference kernel
                    riesz_Kij(zx, K1);
                    riesz_Kij({-ym[0], -ym[1], -ym[2]}, K2);
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j)
                            contrib += (K1[i][j] - K2[i][j]) * N.comp(i, j)[static_cast<std::size_t>(idx)];
                }
                acc += contrib;
            }
            return acc;
        });
        series.push_back(val * h3);
    }
    return series;
}

PressureReport pcheck_local(const Trajectory& w_traj, const Trajectory& V_traj,
                            const std::vector<ScalarField>& p, const Vec3& x0, double tol_press,
                            std::optional<double> tau, std::vector<std::size_t> tidx) {
    const Grid& g = w_traj.grid();
    if (V_traj.size() != w_traj.size()) throw ValidationError("pcheck_local: trajectory mismatch");
    if (tidx.empty()) tidx = all_indices(w_traj.size());
    const double x0inf = std::max({std::abs(x0[0]), std::abs(x0[1]), std::abs(x0[2])});
    if (tau) {
        if (*tau <= 4.0) throw ValidationError("pcheck_local: tau must exceed 4");
        if (1.5 * *tau + x0inf > g.half_length())
            throw ValidationError("pcheck_local: rho_tau support exits the box");
    }
    if (3.0 + x0inf > g.half_length())
        throw ValidationError("pcheck_local: rho_2 support exits the box");

    PressureReport rep;
    rep.x0 = x0;

    const LocalBall proto = make_local_ball(g, x0, 1.5);
    const Vec3 xs = proto.x0;
    const double h = g.spacing();
    const double h3 = h * h * h;

    // rho_2 and its gradient around x0 (closed forms).
    const auto rho = [&](const Vec3& y, double scale) {
        const Vec3 z = g.min_image(y, xs);
        return cutoff::bump(std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / scale);
    };
    const auto grad_rho = [&](const Vec3& y, double scale) -> Vec3 {
        const Vec3 z = g.min_image(y, xs);
        const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
        if (r < 1e-14) return {0, 0, 0};
        const double s = cutoff::bump_d(r / scale) / (scale * r);
        return {s * z[0], s * z[1], s * z[2]};
    };

    double vmax_u2 = 0.0;  // ||V||_{U^{inf,2}} over the sampled window

    for (std::size_t si = 0; si < tidx.size(); ++si) {
        const std::size_t m = tidx[si];
        const VectorField& w = w_traj.snapshot(m);
        const VectorField& V = V_traj.snapshot(m);
        rep.times.push_back(w_traj.times()[m]);

        // F = w x w + V x w + w x V ; G = V x V
        TensorField F(g, w.time()), G(g, w.time());
        parallel_for(g.num_nodes(), [&](std::int64_t idx) {
            const auto s = static_cast<std::size_t>(idx);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double wi = w.comp(i)[s], wj = w.comp(j)[s];
                    const double Vi = V.comp(i)[s], Vj = V.comp(j)[s];
                    F.comp(i, j)[s] = wi * wj + Vi * wj + wi * Vj;
                    G.comp(i, j)[s] = Vi * Vj;
                }
        });

        // p^F: the three-term formula with F.
        double tail = 0.0;
        LocalBall ball = local_pressure_three_term(F, x0, &tail);

        // (V . grad) V, spectral gradient.
        const TensorField gV = gradient(V);
        VectorField VgradV(g, V.time());
        parallel_for(g.num_nodes(), [&](std::int64_t idx) {
            const auto s = static_cast<std::size_t>(idx);
            for (int i = 0; i < 3; ++i) {
                double acc = 0.0;
                for (int j = 0; j < 3; ++j) acc += V.comp(j)[s] * gV.comp(j, i)[s];
                VgradV.comp(i)[s] = acc;
            }
        });

        // G-terms on rho_2: near K_i integral over supp rho_2 (B(x0,3)),
        // far K_ij difference against G(1-rho_2), shell K_i difference
        // against G grad(rho_2).
        const auto& near_st = g.ball_stencil(3.0);
        const auto& offs = *ball.offsets;
        std::vector<double> g_terms(offs.size(), 0.0);
        parallel_for(static_cast<std::int64_t>(offs.size()), [&](std::int64_t e) {
            const auto& de = offs[static_cast<std::size_t>(e)];
            double acc = 0.0;
            for (const auto& ds : near_st) {
                const int zx = de[0] - ds[0], zy = de[1] - ds[1], zz = de[2] - ds[2];
                const auto yn = wrap_add(g, ball.node, ds);
                const std::int64_t yi = g.index(yn[0], yn[1], yn[2]);
                const Vec3 y = {g.coord(yn[0]), g.coord(yn[1]), g.coord(yn[2])};
                const double r2v = rho(y, 2.0);
                const Vec3 gr2 = grad_rho(y, 2.0);
                // K_i(x - y) [(V.grad)V_i rho_2] (skip singular cell)
                if (!(zx == 0 && zy == 0 && zz == 0) && r2v != 0.0) {
                    const Vec3 z = {zx * h, zy * h, zz * h};
                    const Vec3 Ki = riesz_Ki(z);
                    for (int i = 0; i < 3; ++i)
                        acc += Ki[static_cast<std::size_t>(i)] *
                               VgradV.comp(i)[static_cast<std::size_t>(yi)] * r2v;
                }
                // (K_i(x-y) - K_i(x0-y)) V_i V_j d_j rho_2
                if (gr2[0] != 0.0 || gr2[1] != 0.0 || gr2[2] != 0.0) {
                    Vec3 Ka = {0, 0, 0}, Kb = {0, 0, 0};
                    if (!(zx == 0 && zy == 0 && zz == 0)) Ka = riesz_Ki({zx * h, zy * h, zz * h});
                    if (!(ds[0] == 0 && ds[1] == 0 && ds[2] == 0))
                        Kb = riesz_Ki({-ds[0] * h, -ds[1] * h, -ds[2] * h});
                    for (int i = 0; i < 3; ++i) {
                        double gj = 0.0;
                        for (int j = 0; j < 3; ++j)
                            gj += G.comp(i, j)[static_cast<std::size_t>(yi)] * gr2[static_cast<std::size_t>(j)];
                        acc += (Ka[static_cast<std::size_t>(i)] - Kb[static_cast<std::size_t>(i)]) * gj;
                    }
                }
            }
            g_terms[static_cast<std::size_t>(e)] = acc * h3;
        });
        for (std::size_t e = 0; e < offs.size(); ++e) ball.values[e] += g_terms[e];

        // Far G-term with the smooth mask.
        TensorField Gfar(g, V.time());
        parallel_for(g.num_nodes(), [&](std::int64_t idx) {
            const auto s = static_cast<std::size_t>(idx);
            const double mask = 1.0 - rho(g.node(idx), 2.0);
            for (int c = 0; c < 9; ++c) Gfar.comp(c)[s] = G.comp(c)[s] * mask;
        });
        tail += riesz_far_difference_masked(Gfar, ball);

        // The constants q~ and q^ of the identity phat = pcheck + q~ + q^.
        double qtilde = 0.0, qhat = 0.0;
        {
            double acc_qt = 0.0, acc_qh = 0.0;
            for (const auto& ds : near_st) {
                if (ds[0] == 0 && ds[1] == 0 && ds[2] == 0) continue;
                const auto yn = wrap_add(g, proto.node, ds);
                const std::int64_t yi = g.index(yn[0], yn[1], yn[2]);
                const Vec3 y = {g.coord(yn[0]), g.coord(yn[1]), g.coord(yn[2])};
                const Vec3 z = {-ds[0] * h, -ds[1] * h, -ds[2] * h};  // x0 - y
                const double rn = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
                const double r2v = rho(y, 2.0);
                if (rn > 2.0 && r2v != 0.0) {
                    double K[3][3];
                    riesz_Kij(z, K);
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j)
                            acc_qt -= K[i][j] * G.comp(i, j)[static_cast<std::size_t>(yi)] * r2v;
                }
                const Vec3 gr2 = grad_rho(y, 2.0);
                if (gr2[0] != 0.0 || gr2[1] != 0.0 || gr2[2] != 0.0) {
                    const Vec3 Ki = riesz_Ki(z);
                    for (int i = 0; i < 3; ++i) {
                        double gj = 0.0;
                        for (int j = 0; j < 3; ++j)
                            gj += G.comp(i, j)[static_cast<std::size_t>(yi)] * gr2[static_cast<std::size_t>(j)];
                        acc_qh += Ki[static_cast<std::size_t>(i)] * gj;
                    }
                }
            }
            qtilde = acc_qt * h3;
            qhat = acc_qh * h3;
        }
        rep.qtilde.push_back(qtilde);
        rep.qhat.push_back(qhat);
        rep.tail_bound.push_back(tail);
        rep.local.push_back(std::move(ball));

        vmax_u2 = std::max(vmax_u2, lq_uloc(V, 2.0).value);
    }

    // q_{x0}(t) and the spatial-variance verdict against p.
    const double t0 = rep.times.front(), t1 = rep.times.back();
    Trajectory vsum(g);
    for (std::size_t m = 0; m < w_traj.size(); ++m)
        vsum.push_back(w_traj.times()[m], w_traj.snapshot(m) + V_traj.snapshot(m));
    const double u33 = t1 > t0 ? usp_norm(vsum, 3.0, 3.0, t0, t1).value
                               : lq_uloc(vsum.snapshot(tidx.front()), 3.0).value;
    rep.v_u33_sq = u33 * u33;
    rep.tol = tol_press * (1.0 + rep.v_u33_sq);
    rep.l32_norm = l32_cylinder(g, rep.local, rep.times);
    rep.ratio = rep.v_u33_sq > 0.0 ? rep.l32_norm / rep.v_u33_sq : 0.0;

    bool pass = true;
    for (std::size_t s = 0; s < tidx.size(); ++s) {
        const auto& ball = rep.local[s];
        const ScalarField& ps = p[tidx[s]];
        double vmin = kInf, vmax = -kInf, mean = 0.0;
        const auto& offs = *ball.offsets;
        for (std::size_t e = 0; e < offs.size(); ++e) {
            const auto xn = wrap_add(g, ball.node, offs[e]);
            const double d = ps[g.index(xn[0], xn[1], xn[2])] - ball.values[e];
            vmin = std::min(vmin, d);
            vmax = std::max(vmax, d);
            mean += d;
        }
        mean /= static_cast<double>(offs.size());
        rep.c_series.push_back(mean);
        rep.variance.push_back(vmax - vmin);
        if (vmax - vmin > rep.tol) pass = false;
    }
    rep.pass = pass;

    double qsum = 0.0;
    for (std::size_t s = 0; s < rep.qtilde.size(); ++s)
        qsum = std::max(qsum, std::abs(rep.qtilde[s]) + std::abs(rep.qhat[s]));
    rep.qsum_envelope = vmax_u2 > 0.0 ? qsum / (vmax_u2 * vmax_u2) : 0.0;
    return rep;
}

GResplitReport pcheck_g_resplit(const Trajectory& V_traj, const Vec3& x0, double tau,
                                std::vector<std::size_t> tidx) {
    const Grid& g = V_traj.grid();
    const double x0inf = std::max({std::abs(x0[0]), std::abs(x0[1]), std::abs(x0[2])});
    if (tau <= 4.0) throw ValidationError("pcheck_g_resplit: tau must exceed 4");
    if (1.5 * tau + x0inf > g.half_length())
        throw ValidationError("pcheck_g_resplit: rho_tau support exits the box");
    if (tidx.empty()) tidx = all_indices(V_traj.size());

    const LocalBall proto = make_local_ball(g, x0, 1.5);
    const Vec3 xs = proto.x0;
    const double h = g.spacing();
    const double h3 = h * h * h;

    const auto rho = [&](const Vec3& y, double scale) {
        const Vec3 z = g.min_image(y, xs);
        return cutoff::bump(std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / scale);
    };
    const auto grad_rho = [&](const Vec3& y, double scale) -> Vec3 {
        const Vec3 z = g.min_image(y, xs);
        const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
        if (r < 1e-14) return {0, 0, 0};
        const double s = cutoff::bump_d(r / scale) / (scale * r);
        return {s * z[0], s * z[1], s * z[2]};
    };

    GResplitReport rep;
    std::vector<LocalBall> g1s, g2s, g3s;
    std::vector<double> times;
    for (std::size_t m : tidx) {
        times.push_back(V_traj.times()[m]);
        const VectorField& V = V_traj.snapshot(m);
        TensorField G(g, V.time());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) core::nodewise_multiply(G.comp(i, j), V.comp(i), V.comp(j));
        const TensorField gV = gradient(V);
        VectorField VgradV(g, V.time());
        parallel_for(g.num_nodes(), [&](std::int64_t idx) {
            const auto s = static_cast<std::size_t>(idx);
            for (int i = 0; i < 3; ++i) {
                double acc = 0.0;
                for (int j = 0; j < 3; ++j) acc += V.comp(j)[s] * gV.comp(j, i)[s];
                VgradV.comp(i)[s] = acc;
            }
        });

        // Difference-kernel sums of K_ij against G*mask and K_i against
        // G contracted with a gradient field, shared by all pieces.
        auto kij_diff = [&](const std::function<double(const Vec3&)>& mask, LocalBall& out) {
            TensorField M(g, V.time());
            parallel_for(g.num_nodes(), [&](std::int64_t idx) {
                const auto s = static_cast<std::size_t>(idx);
                const double w = mask(g.node(idx));
                for (int c = 0; c < 9; ++c) M.comp(c)[s] = G.comp(c)[s] * w;
            });
            riesz_far_difference_masked(M, out);
        };
        auto ki_diff = [&](const std::function<Vec3(const Vec3&)>& gmask, double reach,
                           LocalBall& out) {
            const auto& st = g.ball_stencil(reach);
            const auto& offs = *out.offsets;
            std::vector<double> add(offs.size(), 0.0);
            parallel_for(static_cast<std::int64_t>(offs.size()), [&](std::int64_t e) {
                const auto& de = offs[static_cast<std::size_t>(e)];
                double acc = 0.0;
                for (const auto& ds : st) {
                    const auto yn = wrap_add(g, out.node, ds);
                    const Vec3 y = {g.coord(yn[0]), g.coord(yn[1]), g.coord(yn[2])};
                    const Vec3 gm = gmask(y);
                    if (gm[0] == 0.0 && gm[1] == 0.0 && gm[2] == 0.0) continue;
                    const std::int64_t yi = g.index(yn[0], yn[1], yn[2]);
                    const int zx = de[0] - ds[0], zy = de[1] - ds[1], zz = de[2] - ds[2];
                    Vec3 Ka = {0, 0, 0}, Kb = {0, 0, 0};
                    if (!(zx == 0 && zy == 0 && zz == 0)) Ka = riesz_Ki({zx * h, zy * h, zz * h});
                    if (!(ds[0] == 0 && ds[1] == 0 && ds[2] == 0))
                        Kb = riesz_Ki({-ds[0] * h, -ds[1] * h, -ds[2] * h});
                    for (int i = 0; i < 3; ++i) {
                        double gj = 0.0;
                        for (int j = 0; j < 3; ++j)
                            gj += G.comp(i, j)[static_cast<std::size_t>(yi)] * gm[static_cast<std::size_t>(j)];
                        acc += (Ka[static_cast<std::size_t>(i)] - Kb[static_cast<std::size_t>(i)]) * gj;
                    }
                }
                add[static_cast<std::size_t>(e)] = acc * h3;
            });
            for (std::size_t e = 0; e < offs.size(); ++e) out.values[e] += add[e];
        };

        // G1 = int K_i (V.grad V_i) rho_2 over B(x0,3)
        LocalBall g1 = make_local_ball(g, x0, 1.5);
        {
            const auto& st = g.ball_stencil(3.0);
            const auto& offs = *g1.offsets;
            parallel_for(static_cast<std::int64_t>(offs.size()), [&](std::int64_t e) {
                const auto& de = offs[static_cast<std::size_t>(e)];
                double acc = 0.0;
                for (const auto& ds : st) {
                    const int zx = de[0] - ds[0], zy = de[1] - ds[1], zz = de[2] - ds[2];
                    if (zx == 0 && zy == 0 && zz == 0) continue;
                    const auto yn = wrap_add(g, g1.node, ds);
                    const Vec3 y = {g.coord(yn[0]), g.coord(yn[1]), g.coord(yn[2])};
                    const double r2v = rho(y, 2.0);
                    if (r2v == 0.0) continue;
                    const Vec3 Ki = riesz_Ki({zx * h, zy * h, zz * h});
                    const std::int64_t yi = g.index(yn[0], yn[1], yn[2]);
                    for (int i = 0; i < 3; ++i)
                        acc += Ki[static_cast<std::size_t>(i)] * VgradV.comp(i)[static_cast<std::size_t>(yi)] * r2v;
                }
                g1.values[static_cast<std::size_t>(e)] = acc * h3;
            });
        }

        // G2 = Kij-diff against G (rho_tau - rho_2) - Ki-diff against
        //      G grad(rho_tau - rho_2)
        LocalBall g2 = make_local_ball(g, x0, 1.5);
        kij_diff([&](const Vec3& y) { return rho(y, tau) - rho(y, 2.0); }, g2);
        {
            LocalBall tmp = make_local_ball(g, x0, 1.5);
            ki_diff(
                [&](const Vec3& y) -> Vec3 {
                    const Vec3 a = grad_rho(y, tau);
                    const Vec3 b = grad_rho(y, 2.0);
                    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
                },
                1.5 * tau, tmp);
            for (std::size_t e = 0; e < g2.values.size(); ++e) g2.values[e] -= tmp.values[e];
        }

        // G3 = Kij-diff against G (1 - rho_tau) + Ki-diff against G grad rho_tau
        LocalBall g3 = make_local_ball(g, x0, 1.5);
        kij_diff([&](const Vec3& y) { return 1.0 - rho(y, tau); }, g3);
        ki_diff([&](const Vec3& y) { return grad_rho(y, tau); }, 1.5 * tau, g3);

        // rho_2 grouping: far + shell (what pcheck_local uses).
        LocalBall r2 = make_local_ball(g, x0, 1.5);
        kij_diff([&](const Vec3& y) { return 1.0 - rho(y, 2.0); }, r2);
        ki_diff([&](const Vec3& y) { return grad_rho(y, 2.0); }, 3.0, r2);

        for (std::size_t e = 0; e < r2.values.size(); ++e) {
            const double gap = (g2.values[e] + g3.values[e]) - r2.values[e];
            rep.regroup_gap = std::max(rep.regroup_gap, std::abs(gap));
        }
        g1s.push_back(std::move(g1));
        g2s.push_back(std::move(g2));
        g3s.push_back(std::move(g3));
    }
    rep.g1_l32 = l32_cylinder(g, g1s, times);
    rep.g2_l32 = l32_cylinder(g, g2s, times);
    rep.g3_l32 = l32_cylinder(g, g3s, times);
    return rep;
}

double pressure_identity_gap(const Trajectory& w_traj, const Trajectory& V_traj, const Vec3& x0,
                             std::vector<std::size_t> tidx) {
    const Grid& g = w_traj.grid();
    if (tidx.empty()) tidx = all_indices(w_traj.size());

    // pcheck + q~ + q^ from the new decomposition, phat from v = V + w.
    std::vector<ScalarField> dummy_p(w_traj.size(), ScalarField(g));
    Trajectory v(g);
    for (std::size_t m = 0; m < w_traj.size(); ++m)
        v.push_back(w_traj.times()[m], w_traj.snapshot(m) + V_traj.snapshot(m));

    PressureReport pc = pcheck_local(w_traj, V_traj, dummy_p, x0, 1.0, std::nullopt, tidx);
    PressureReport ph = phat_local(v, x0, tidx);

    double gap = 0.0;
    for (std::size_t s = 0; s < tidx.size(); ++s) {
        const auto& a = ph.local[s];
        const auto& b = pc.local[s];
        for (std::size_t e = 0; e < a.values.size(); ++e) {
            const double d = a.values[e] - (b.values[e] + pc.qtilde[s] + pc.qhat[s]);
            gap = std::max(gap, std::abs(d));
        }
    }
    return gap;
}

}  // namespace ulf
