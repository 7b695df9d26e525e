#include "ulf/solver.hpp"

#include <cmath>
#include <sstream>

#include "ulf/cutoff.hpp"
#include "ulf/kernels_core.hpp"
#include "ulf/parallel.hpp"
#include "ulf/spectral.hpp"
#include "ulf/testfunction.hpp"

namespace ulf {

void MildSolveConfig::validate(const Grid& g, double B) const {
    std::ostringstream err;
    if (eps < 2.0 * g.spacing() - 1e-12) {
        err << "solver: eps=" << eps << " < 2h=" << 2.0 * g.spacing();
        throw ValidationError(err.str());
    }
    const double window = B > 0.0 ? c_picard * eps * eps * eps / (B * B) : 1.0;
    const double T_max = std::min(1.0, window);
    if (T > T_max + 1e-12) {
        err << "solver: T=" << T << " exceeds Picard window min(1, c eps^3 B^-2)=" << T_max;
        throw ValidationError(err.str());
    }
    if (dt <= 0.0 || dt > T / 16.0 + 1e-12) {
        err << "solver: dt=" << dt << " must be positive and <= T/16=" << T / 16.0;
        throw ValidationError(err.str());
    }
    const double steps = T / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw ValidationError("solver: T must be an integer multiple of dt");
}

TensorField nonlinearity(const VectorField& v, double eps) {
    const Grid& g = v.grid();
    const Mollifier moll = Mollifier::make(g, eps);
    const VectorField jv = moll.apply(v);
    const ScalarField phi = phi_eps_field(g, eps);
    TensorField N(g, v.time());
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            core::nodewise_multiply3(N.comp(j, k), jv.comp(j), v.comp(k), phi.data());
    return N;
}

namespace {

// Per-solve spectral workspace: mollifier symbol, localization field and the
// one-step heat multiplier are fixed by (grid, eps, dt).
struct PicardOps {
    Grid grid;
    double eps;
    Mollifier moll;
    ScalarField phi;
    RealVec heat_dt;

    PicardOps(const Grid& g, double eps_, double dt)
        : grid(g), eps(eps_), moll(Mollifier::make(g, eps_)), phi(phi_eps_field(g, eps_)),
          heat_dt(heat_symbol(g, dt)) {}

    // G = P div N^eps(v), spectral.
    SpectralVec nonlinear_term(const VectorField& v, bool enabled) const {
        TensorField N(grid, v.time());
        if (enabled) {
            const VectorField jv = moll.apply(v);
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    core::nodewise_multiply3(N.comp(j, k), jv.comp(j), v.comp(k), phi.data());
        }
        SpectralVec G = divergence_spec(N);
        leray_project_spec(G);
        return G;
    }
};

double sup_uloc2_distance(const Trajectory& a, const Trajectory& b, double stride) {
    double worst = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) {
        const VectorField diff = a.snapshot(m) - b.snapshot(m);
        worst = std::max(worst, lq_uloc(diff, 2.0, stride).value);
    }
    return worst;
}

}  // namespace

double trajectory_energy_distance(const Trajectory& a, const Trajectory& b, double stride) {
    if (a.size() != b.size()) throw ValidationError("trajectory distance: size mismatch");
    Trajectory diff(a.grid());
    for (std::size_t m = 0; m < a.size(); ++m)
        diff.push_back(a.times()[m], a.snapshot(m) - b.snapshot(m));
    return energy_norm(diff, diff.times().front(), diff.times().back(), stride).value;
}

Trajectory picard_mild_solve(const VectorField& v0, const MildSolveConfig& cfg, SolveInfo* info) {
    const Grid& g = v0.grid();
    const double B = lq_uloc(v0, 2.0, cfg.probe_stride).value;
    cfg.validate(g, B);
    if (!all_finite(v0)) throw ValidationError("solver: non-finite initial data");

    const int M = static_cast<int>(std::round(cfg.T / cfg.dt));
    std::vector<double> times(static_cast<std::size_t>(M) + 1);
    for (int m = 0; m <= M; ++m) times[static_cast<std::size_t>(m)] = m * cfg.dt;

    const PicardOps ops(g, cfg.eps, cfg.dt);
    const SpectralVec v0_spec = to_spectral(v0);

    // Iterate from the heat flow.
    Trajectory cur(g);
    {
        SpectralVec hs = v0_spec;
        cur.push_back(0.0, v0);
        for (int m = 1; m <= M; ++m) {
            apply_symbol(hs, ops.heat_dt);
            hs.time = times[static_cast<std::size_t>(m)];
            cur.push_back(hs.time, to_real(hs));
        }
    }

    SolveInfo local;
    local.B = B;
    double prev_disp = -1.0;
    bool converged = false;
    bool full_norm_next = false;

    // Sweeps run in place (the m-loop only reads cur[m] before overwriting
    // it), so one trajectory buffer suffices even on refined grids. The
    // iterate displacement in the discrete E_T norm is accumulated from the
    // per-snapshot differences during the sweep; the gradient part is only
    // evaluated once the cheap U^{inf,2} tracker is near tolerance.
    const auto probes = probe_lattice(g, cfg.probe_stride);
    const auto& stencil = g.ball_stencil(1.0);
    const double h3 = std::pow(g.spacing(), 3.0);

    for (int it = 0; it < cfg.max_iter; ++it) {
        SpectralVec hs = v0_spec;
        SpectralVec I{g, 0.0, {}};
        for (auto& c : I.comp) c.assign(static_cast<std::size_t>(g.fft().spec_size()), {0.0, 0.0});
        SpectralVec G_prev = ops.nonlinear_term(cur.snapshot(0), cfg.nonlinearity_enabled);
        double disp_uinf = 0.0;
        std::vector<double> grad_acc(probes.size(), 0.0);
        std::vector<double> sweep_vals;
        const bool with_grad = full_norm_next;
        for (int m = 1; m <= M; ++m) {
            apply_symbol(hs, ops.heat_dt);
            SpectralVec G_next =
                ops.nonlinear_term(cur.snapshot(static_cast<std::size_t>(m)), cfg.nonlinearity_enabled);
            duhamel_step(I, G_prev, G_next, ops.heat_dt, cfg.dt);
            G_prev = std::move(G_next);
            SpectralVec vq{g, times[static_cast<std::size_t>(m)], {}};
            for (int c = 0; c < 3; ++c) {
                auto& comp = vq.comp[static_cast<std::size_t>(c)];
                comp = hs.comp[static_cast<std::size_t>(c)];
                const auto& Ic = I.comp[static_cast<std::size_t>(c)];
                for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= Ic[i];
            }
            VectorField vnew = to_real(vq);
            const VectorField diff = vnew - cur.snapshot(static_cast<std::size_t>(m));
            const RealVec mag = magnitude_field(diff);
            core::ball_pow_sweep(g, mag, probes, stencil, 2.0, sweep_vals);
            double best = 0.0;
            for (double v : sweep_vals) best = std::max(best, v);
            disp_uinf = std::max(disp_uinf, std::sqrt(best * h3));
            if (with_grad) {
                const TensorField gd = gradient(diff);
                RealVec gm(mag.size());
                parallel_for(static_cast<std::int64_t>(gm.size()), [&](std::int64_t i) {
                    double acc = 0.0;
                    for (int c = 0; c < 9; ++c) {
                        const double v = gd.comp(c)[static_cast<std::size_t>(i)];
                        acc += v * v;
                    }
                    gm[static_cast<std::size_t>(i)] = std::sqrt(acc);
                });
                core::ball_pow_sweep(g, gm, probes, stencil, 2.0, sweep_vals);
                // trapezoid weight of interior snapshots; endpoints halved
                const double wgt = (m == M) ? 0.5 * cfg.dt : cfg.dt;
                for (std::size_t p = 0; p < probes.size(); ++p)
                    grad_acc[p] += wgt * sweep_vals[p] * h3;
            }
            cur.snapshot(static_cast<std::size_t>(m)) = std::move(vnew);
        }

        double disp = disp_uinf;
        if (with_grad) {
            double best = 0.0;
            for (double v : grad_acc) best = std::max(best, v);
            disp += std::sqrt(best);
        }
        local.displacement.push_back(disp);
        if (prev_disp > 0.0 && prev_disp > 1e-300)
            local.contraction = std::max(local.contraction, disp / prev_disp);
        prev_disp = disp;
        local.iterations = it + 1;
        if (disp == 0.0 || (with_grad && disp < cfg.tol)) {
            converged = true;
            break;
        }
        full_norm_next = with_grad || disp_uinf < 0.25 * cfg.tol;
        if (it >= 2 && local.contraction >= 1.0) {
            std::ostringstream err;
            err << "picard: non-contraction (factor " << local.contraction
                << "); choose a smaller T";
            throw NumericalError(err.str());
        }
    }
    if (!converged) {
        std::ostringstream err;
        err << "picard: no convergence in " << cfg.max_iter << " iterations (last displacement "
            << prev_disp << "); choose a smaller T";
        throw NumericalError(err.str());
    }
    local.converged = true;

    if (info) *info = std::move(local);
    return cur;
}

Trajectory picard_map(const Trajectory& traj, double eps) {
    const Grid& g = traj.grid();
    const auto& times = traj.times();
    if (times.size() < 2) throw ValidationError("picard_map: need at least two snapshots");
    const double dt = times[1] - times[0];
    const PicardOps ops(g, eps, dt);
    const VectorField& v0 = traj.snapshot(0);
    const SpectralVec v0_spec = to_spectral(v0);

    Trajectory out(g);
    out.push_back(times[0], v0);
    SpectralVec hs = v0_spec;
    SpectralVec I{g, 0.0, {}};
    for (auto& c : I.comp) c.assign(static_cast<std::size_t>(g.fft().spec_size()), {0.0, 0.0});
    SpectralVec G_prev = ops.nonlinear_term(traj.snapshot(0), true);
    for (std::size_t m = 1; m < times.size(); ++m) {
        apply_symbol(hs, ops.heat_dt);
        SpectralVec G_next = ops.nonlinear_term(traj.snapshot(m), true);
        duhamel_step(I, G_prev, G_next, ops.heat_dt, dt);
        G_prev = std::move(G_next);
        SpectralVec vq{g, times[m], {}};
        for (int c = 0; c < 3; ++c) {
            auto& comp = vq.comp[static_cast<std::size_t>(c)];
            comp = hs.comp[static_cast<std::size_t>(c)];
            const auto& Ic = I.comp[static_cast<std::size_t>(c)];
            for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= Ic[i];
        }
        out.push_back(times[m], to_real(vq));
    }
    return out;
}

ResidualReport residual_check(const Trajectory& traj, const std::vector<ScalarField>& p_snaps,
                              double eps) {
    const Grid& g = traj.grid();
    if (p_snaps.size() != traj.size())
        throw ValidationError("residual_check: need one pressure snapshot per time");
    const double T = traj.times().back();
    const auto family = weak_test_family(g, T);
    const std::size_t M = traj.size();

    // theta and theta' are integrated exactly against the snapshot hat
    // functions; the spatial evaluations are t-independent and cached.
    std::vector<std::vector<double>> w_theta, w_dtheta;
    std::vector<std::vector<WeakTestFunction::Spatial>> spatial(family.size());
    for (const auto& tf : family) {
        w_theta.push_back(theta_hat_weights(traj.times(), 0, M - 1, tf.theta));
        w_dtheta.push_back(theta_hat_weights(traj.times(), 0, M - 1, tf.theta_dot));
    }
    for (std::size_t f = 0; f < family.size(); ++f) {
        spatial[f].reserve(family[f].support.size());
        for (std::int64_t k : family[f].support) spatial[f].push_back(family[f].space(g.node(k)));
    }

    const Mollifier* moll = nullptr;
    Mollifier moll_store = Mollifier::make(g, eps > 0.0 ? eps : 2.0 * g.spacing());
    ScalarField phi = eps > 0.0 ? phi_eps_field(g, eps) : ScalarField(g);
    if (eps > 0.0) moll = &moll_store;

    const double h3 = std::pow(g.spacing(), 3.0);
    std::vector<double> acc(family.size(), 0.0);
    std::vector<double> mass(family.size(), 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        const VectorField& v = traj.snapshot(m);
        TensorField N(g, traj.times()[m]);
        if (eps > 0.0) {
            const VectorField jv = moll->apply(v);
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    core::nodewise_multiply3(N.comp(j, k), jv.comp(j), v.comp(k), phi.data());
        } else {
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    core::nodewise_multiply(N.comp(j, k), v.comp(j), v.comp(k));
        }
        const ScalarField& p = p_snaps[m];
        for (std::size_t f = 0; f < family.size(); ++f) {
            const auto& tf = family[f];
            double term_v = 0.0, term_rest = 0.0;
            for (std::size_t si = 0; si < tf.support.size(); ++si) {
                const std::int64_t k = tf.support[si];
                const auto& sp = spatial[f][si];
                for (int c = 0; c < 3; ++c) {
                    term_v -= v.value(c, k) * sp.vec[static_cast<std::size_t>(c)];
                    term_rest -= v.value(c, k) * sp.lap[static_cast<std::size_t>(c)];
                }
                for (int j = 0; j < 3; ++j)
                    for (int i = 0; i < 3; ++i)
                        term_rest -= N.comp(j, i)[static_cast<std::size_t>(k)] *
                                     sp.grad[static_cast<std::size_t>(3 * j + i)];
                term_rest -= p[k] * sp.div;
            }
            acc[f] += (w_dtheta[f][m] * term_v + w_theta[f][m] * term_rest) * h3;
            mass[f] += (std::abs(w_dtheta[f][m] * term_v) + std::abs(w_theta[f][m] * term_rest)) * h3;
        }
    }

    // Relative residuals against the family-wide integral mass: members
    // aligned with near-zero velocity components would otherwise divide
    // tiny cancellations by tiny scales.
    ResidualReport rep;
    double denom = 1e-300;
    for (double m : mass) denom = std::max(denom, m);
    for (std::size_t f = 0; f < family.size(); ++f) {
        rep.residuals.push_back(std::abs(acc[f]) / denom);
        rep.max_residual = std::max(rep.max_residual, rep.residuals.back());
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(acc[f]));
    }
    return rep;
}

Trajectory extend_glue(const Trajectory& traj, const MildSolveConfig& cfg, double T_total,
                       GlueInfo* info) {
    const Grid& g = traj.grid();
    Trajectory glued = traj;
    GlueInfo gi;

    while (glued.times().back() < T_total - 1e-12) {
        const double t_end = glued.times().back();
        const double S = cfg.T;
        // Restart at tau = t_end - S/8, i.e. 7S/8 into the last segment,
        // snapped to the snapshot grid.
        const double tau = std::round((t_end - S / 8.0) / cfg.dt) * cfg.dt;
        const std::size_t seam = glued.index_of(tau);
        const VectorField v_tau = glued.snapshot(seam);

        // restart solves always use the full window; the appended piece is
        // trimmed at T_total so dt <= T/16 holds on every segment
        MildSolveConfig seg = cfg;
        SolveInfo si;
        Trajectory piece = picard_mild_solve(v_tau, seg, &si);
        gi.segments.push_back(si);
        gi.seams.push_back(tau);

        Trajectory next(g);
        for (std::size_t m = 0; m <= seam; ++m) next.push_back(glued.times()[m], glued.snapshot(m));
        for (std::size_t m = 1; m < piece.size(); ++m) {
            const double t = tau + piece.times()[m];
            if (t > T_total + 1e-12) break;
            next.push_back(t, piece.snapshot(m));
        }
        glued = std::move(next);
    }

    // Integral-equation consistency across the seams: re-apply the Picard
    // map from t = 0 on the glued trajectory and measure the displacement.
    Trajectory reapplied = picard_map(glued, cfg.eps);
    gi.seam_consistency = sup_uloc2_distance(reapplied, glued, cfg.probe_stride);
    if (info) *info = std::move(gi);
    return glued;
}

Trajectory perturb_w(const Trajectory& traj, const VectorField& u0) {
    if (u0.grid() != traj.grid()) throw ValidationError("perturb_w: grid mismatch");
    Trajectory w(traj.grid());
    const SpectralVec u0_spec = to_spectral(u0);
    for (std::size_t m = 0; m < traj.size(); ++m) {
        SpectralVec hs = u0_spec;
        apply_symbol(hs, heat_symbol(traj.grid(), traj.times()[m]));
        hs.time = traj.times()[m];
        w.push_back(traj.times()[m], traj.snapshot(m) - to_real(hs));
    }
    return w;
}

Trajectory heat_trajectory(const VectorField& u0, const std::vector<double>& times) {
    Trajectory V(u0.grid());
    const SpectralVec u0_spec = to_spectral(u0);
    for (double t : times) {
        SpectralVec hs = u0_spec;
        apply_symbol(hs, heat_symbol(u0.grid(), t));
        hs.time = t;
        V.push_back(t, to_real(hs));
    }
    return V;
}

WeightedSolveState h_weighted_solve(const VectorField& h0, const Trajectory& V_traj, double t0,
                                    double S, double eps, double delta) {
    const Grid& g = h0.grid();
    const double h0_norm = lq_uloc(h0, 4.0).value;
    if (h0_norm >= delta) {
        std::ostringstream err;
        err << "h_weighted_solve: ||h0||_{L^4_uloc}=" << h0_norm << " >= delta=" << delta;
        throw ValidationError(err.str());
    }

    // Solve grid: V_traj times restricted to [t0, t0+S].
    std::vector<double> times;
    std::vector<std::size_t> vidx;
    for (std::size_t m = 0; m < V_traj.size(); ++m) {
        const double t = V_traj.times()[m];
        if (t >= t0 - 1e-12 && t <= t0 + S + 1e-12) {
            times.push_back(t);
            vidx.push_back(m);
        }
    }
    if (times.size() < 3) throw ValidationError("h_weighted_solve: window has too few snapshots");
    const double dt = times[1] - times[0];

    const PicardOps ops(g, eps, dt);
    const SpectralVec h0_spec = to_spectral(h0);

    auto f_norm_parts = [&](const Trajectory& h) {
        std::vector<RealVec> mags;
        std::vector<const RealVec*> ptrs;
        for (std::size_t m = 0; m < h.size(); ++m) mags.push_back(magnitude_field(h.snapshot(m)));
        for (const auto& m : mags) ptrs.push_back(&m);
        const auto w = trapezoid_weights(h.times(), 0, h.size() - 1);
        const double u4 = usp_from_magnitudes(g, ptrs, w, kInf, 4.0).value;
        double wsup = 0.0;
        for (std::size_t m = 1; m < h.size(); ++m)
            wsup = std::max(wsup, std::pow(h.times()[m] - t0, 0.375) *
                                      core::field_max_abs(mags[m], 64));
        return std::make_pair(u4, wsup);
    };

    // Picard iteration from h = (h0 at t0, 0 after).
    Trajectory cur(g);
    cur.push_back(times[0], h0);
    for (std::size_t m = 1; m < times.size(); ++m) cur.push_back(times[m], VectorField(g));
    WeightedSolveState st;
    st.t0 = t0;
    st.S = S;
    double prev_disp = -1.0;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        Trajectory next(g);
        next.push_back(times[0], h0);
        SpectralVec hs = h0_spec;
        SpectralVec I{g, 0.0, {}};
        for (auto& c : I.comp) c.assign(static_cast<std::size_t>(g.fft().spec_size()), {0.0, 0.0});
        const VectorField H_prev = V_traj.snapshot(vidx[0]) + cur.snapshot(0);
        SpectralVec G_prev = ops.nonlinear_term(H_prev, true);
        for (std::size_t m = 1; m < times.size(); ++m) {
            apply_symbol(hs, ops.heat_dt);
            const VectorField H = V_traj.snapshot(vidx[m]) + cur.snapshot(m);
            SpectralVec G_next = ops.nonlinear_term(H, true);
            duhamel_step(I, G_prev, G_next, ops.heat_dt, dt);
            G_prev = std::move(G_next);
            SpectralVec vq{g, times[m], {}};
            for (int c = 0; c < 3; ++c) {
                auto& comp = vq.comp[static_cast<std::size_t>(c)];
                comp = hs.comp[static_cast<std::size_t>(c)];
                const auto& Ic = I.comp[static_cast<std::size_t>(c)];
                for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= Ic[i];
            }
            next.push_back(times[m], to_real(vq));
        }

        // F-distance between iterates.
        Trajectory diff(g);
        for (std::size_t m = 0; m < times.size(); ++m)
            diff.push_back(times[m], next.snapshot(m) - cur.snapshot(m));
        const auto [du4, dw] = f_norm_parts(diff);
        const double disp = du4 + dw;
        if (prev_disp > 0.0) st.contraction = std::max(st.contraction, disp / prev_disp);
        prev_disp = disp;
        cur = std::move(next);
        st.iterations = it + 1;
        if (disp < 1e-10 * std::max(1.0, delta)) {
            converged = true;
            break;
        }
        if (it >= 2 && st.contraction >= 1.0)
            throw NumericalError("h_weighted_solve: non-contraction; choose a smaller S");
    }
    if (!converged) throw NumericalError("h_weighted_solve: no convergence; choose a smaller S");

    const auto [u4, wsup] = f_norm_parts(cur);
    st.f_norm_uinf4 = u4;
    st.f_norm_weighted = wsup;
    st.f_norm = u4 + wsup;
    double M = 0.0;
    for (std::size_t m = 0; m < times.size(); ++m)
        M = std::max(M, max_abs(V_traj.snapshot(vidx[m])));
    st.M = M;
    st.h = std::move(cur);
    return st;
}

Trajectory split_w_solve(const VectorField& W0, const Trajectory& H_traj, double t0, double S,
                         double eps, EnergySolveInfo* info) {
    const Grid& g = W0.grid();
    std::vector<double> times;
    std::vector<std::size_t> hidx;
    for (std::size_t m = 0; m < H_traj.size(); ++m) {
        const double t = H_traj.times()[m];
        if (t >= t0 - 1e-12 && t <= t0 + S + 1e-12) {
            times.push_back(t);
            hidx.push_back(m);
        }
    }
    if (times.size() < 3) throw ValidationError("split_w_solve: window has too few snapshots");
    const double dt = times[1] - times[0];
    const Mollifier moll = Mollifier::make(g, eps);
    const RealVec heat_dt = heat_symbol(g, dt);
    const double h3 = std::pow(g.spacing(), 3.0);

    EnergySolveInfo ei;
    // f_W = -J_eps(H+W) . grad W - J_eps(W) . grad H, Leray-projected.
    auto rhs = [&](const VectorField& W, std::size_t hm) {
        const VectorField& H = H_traj.snapshot(hm);
        const VectorField jHW = moll.apply(H + W);
        const VectorField jW = moll.apply(W);
        const TensorField gW = gradient(W);
        const TensorField gH = gradient(H);
        VectorField f(g, W.time());
        parallel_for(g.num_nodes(), [&](std::int64_t i) {
            const auto s = static_cast<std::size_t>(i);
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int j = 0; j < 3; ++j) {
                    acc -= jHW.value(j, i) * gW.comp(j, c)[s];
                    acc -= jW.value(j, i) * gH.comp(j, c)[s];
                }
                f.comp(c)[s] = acc;
            }
        });
        SpectralVec fs = to_spectral(f);
        leray_project_spec(fs);
        return fs;
    };

    auto box_l2_sq = [&](const VectorField& W) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            RealVec sq;
            core::nodewise_multiply(sq, W.comp(c), W.comp(c));
            acc += core::field_sum(sq, 64);
        }
        return acc * h3;
    };
    auto grad_l2_sq = [&](const VectorField& W) {
        const TensorField gW = gradient(W);
        double acc = 0.0;
        for (int c = 0; c < 9; ++c) {
            RealVec sq;
            core::nodewise_multiply(sq, gW.comp(c), gW.comp(c));
            acc += core::field_sum(sq, 64);
        }
        return acc * h3;
    };
    auto forcing_work = [&](const SpectralVec& fs, const VectorField& W) {
        const VectorField f = to_real(fs);
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            RealVec sq;
            core::nodewise_multiply(sq, f.comp(c), W.comp(c));
            acc += core::field_sum(sq, 64);
        }
        return acc * h3;
    };

    const double W0_l2sq = box_l2_sq(W0);
    const double blowup_cap = 10.0 * std::sqrt(std::max(W0_l2sq, 1e-30));

    Trajectory out(g);
    out.push_back(times[0], W0);
    VectorField W = W0;
    double dissipation = 0.0;  // 2 int |grad W|^2
    double work = 0.0;         // int f . W
    double grad_prev = grad_l2_sq(W);
    SpectralVec f_prev = rhs(W, hidx[0]);
    double work_prev = forcing_work(f_prev, W);

    ei.energy_lhs.push_back(W0_l2sq);
    ei.energy_rhs.push_back(W0_l2sq);

    double M1 = 0.0;
    for (std::size_t m = 0; m < times.size(); ++m) {
        const TensorField gH = gradient(H_traj.snapshot(hidx[m]));
        for (int c = 0; c < 9; ++c) M1 = std::max(M1, core::field_max_abs(gH.comp(c), 64));
    }
    ei.M1 = M1;

    for (std::size_t m = 1; m < times.size(); ++m) {
        // Integrating-factor RK2.
        SpectralVec Ws = to_spectral(W);
        SpectralVec stage = Ws;
        apply_symbol(stage, heat_dt);
        SpectralVec f0 = f_prev;
        apply_symbol(f0, heat_dt);
        SpectralVec pred = stage;
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < pred.comp[static_cast<std::size_t>(c)].size(); ++i)
                pred.comp[static_cast<std::size_t>(c)][i] += dt * f0.comp[static_cast<std::size_t>(c)][i];
        pred.time = times[m];
        VectorField Wp = to_real(pred);
        SpectralVec f1 = rhs(Wp, hidx[m]);
        SpectralVec Wn = stage;
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < Wn.comp[static_cast<std::size_t>(c)].size(); ++i)
                Wn.comp[static_cast<std::size_t>(c)][i] +=
                    0.5 * dt * (f0.comp[static_cast<std::size_t>(c)][i] + f1.comp[static_cast<std::size_t>(c)][i]);
        Wn.time = times[m];
        W = to_real(Wn);
        out.push_back(times[m], W);

        const double l2sq = box_l2_sq(W);
        if (std::sqrt(l2sq) > blowup_cap)
            throw NumericalError("split_w_solve: norm blow-up (x10); CFL-style instability");

        const double grad_now = grad_l2_sq(W);
        dissipation += dt * (grad_prev + grad_now);  // 2 * trapezoid
        grad_prev = grad_now;
        f_prev = rhs(W, hidx[m]);
        const double work_now = forcing_work(f_prev, W);
        work += 0.5 * dt * (work_prev + work_now);
        work_prev = work_now;

        ei.energy_lhs.push_back(l2sq + dissipation);
        ei.energy_rhs.push_back(W0_l2sq + 2.0 * work);
        ei.max_energy_slack =
            std::max(ei.max_energy_slack, ei.energy_lhs.back() - ei.energy_rhs.back());

        // Gronwall envelope fit: lhs <= e^{C (1+M1)(t-t0)} |W0|^2.
        const double tau = times[m] - t0;
        if (W0_l2sq > 0.0 && tau > 0.0) {
            const double need = std::log(std::max(ei.energy_lhs.back() / W0_l2sq, 1e-300)) /
                                ((1.0 + M1) * tau);
            ei.gronwall_C = std::max(ei.gronwall_C, need);
        }
    }

    if (info) *info = std::move(ei);
    return out;
}

}  // namespace ulf
