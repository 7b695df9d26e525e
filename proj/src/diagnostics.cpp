#include "ulf/diagnostics.hpp"

#include <cmath>
#include <map>

#include "ulf/cutoff.hpp"
#include "ulf/kernels.hpp"
#include "ulf/kernels_core.hpp"
#include "ulf/norms.hpp"
#include "ulf/parallel.hpp"
#include "ulf/solver.hpp"
#include "ulf/spectral.hpp"

namespace ulf {

namespace {

// Shared engine for the four LEI variants. For the w-variants, `field` is w
// while `adv` (= v) carries the flux and `V` the coupling. The temporal
// factor theta of each test function is integrated exactly against the
// snapshot hat functions; spatial evaluations are cached per support node.
std::vector<LEIReport> lei_engine(const Trajectory& field, const Trajectory* V_traj,
                                  const Trajectory* v_traj, const std::vector<ScalarField>& p,
                                  const std::vector<TestFunction>& tfs, double t0, double t,
                                  double eps, double budget, bool w_form, bool slei_coupling) {
    const Grid& g = field.grid();
    const auto [first, last] = field.window(t0, t);
    const double h3 = std::pow(g.spacing(), 3.0);
    const std::size_t F = tfs.size();

    const Mollifier* moll = nullptr;
    Mollifier moll_store = Mollifier::make(g, eps > 0.0 ? eps : 2.0 * g.spacing());
    ScalarField phi_eps_f(g);
    VectorField grad_phi_eps_f(g);
    if (eps > 0.0) {
        moll = &moll_store;
        phi_eps_f = phi_eps_field(g, eps);
        grad_phi_eps_f = grad_phi_eps_field(g, eps);
    }

    std::vector<std::vector<double>> w_theta(F), w_dtheta(F);
    std::vector<std::vector<TestFunction::Spatial>> spatial(F);
    for (std::size_t f = 0; f < F; ++f) {
        w_theta[f] = theta_hat_weights(field.times(), first, last,
                                       [&](double s) { return tfs[f].theta(s); });
        w_dtheta[f] = theta_hat_weights(field.times(), first, last,
                                        [&](double s) { return tfs[f].theta_dot(s); });
        spatial[f].reserve(tfs[f].support().size());
        for (std::int64_t k : tfs[f].support())
            spatial[f].push_back(tfs[f].space_cell_avg(g.node(k)));
    }

    std::vector<LEIReport> reports(F);
    for (std::size_t f = 0; f < F; ++f) {
        reports[f].tf_id = tfs[f].id();
        reports[f].t0 = t0;
        reports[f].t = t;
        reports[f].budget = budget;
    }

    std::vector<double> diss_acc(F, 0.0);
    for (std::size_t m = first; m <= last; ++m) {
        const VectorField& u = field.snapshot(m);
        const VectorField& adv = w_form ? v_traj->snapshot(m) : u;
        const ScalarField& pm = p[m];

        const TensorField gu = gradient(u);
        VectorField ju(g);
        if (eps > 0.0) ju = moll->apply(adv);
        const TensorField* gV = nullptr;
        TensorField gV_store;
        const VectorField* V = nullptr;
        if (w_form) {
            V = &V_traj->snapshot(m);
            if (slei_coupling) {
                gV_store = gradient(*V);
                gV = &gV_store;
            }
        }

        for (std::size_t f = 0; f < F; ++f) {
            double sq_val = 0.0, sq_lap = 0.0, flux = 0.0, flux_moll = 0.0, phi_term = 0.0,
                   press = 0.0, coup = 0.0, diss = 0.0, comm = 0.0;
            const auto& sup = tfs[f].support();
            for (std::size_t si = 0; si < sup.size(); ++si) {
                const std::int64_t k = sup[si];
                const auto& e = spatial[f][si];
                const auto s = static_cast<std::size_t>(k);
                double u2 = 0.0, gu2 = 0.0;
                for (int c = 0; c < 3; ++c) u2 += u.comp(c)[s] * u.comp(c)[s];
                for (int c = 0; c < 9; ++c) gu2 += gu.comp(c)[s] * gu.comp(c)[s];
                sq_val += u2 * e.val;
                sq_lap += u2 * e.lap;
                diss += gu2 * e.val;
                double advgrad = 0.0;
                for (int c = 0; c < 3; ++c)
                    advgrad += adv.comp(c)[s] * e.grad[static_cast<std::size_t>(c)];
                flux += u2 * advgrad;
                double pgrad = 0.0;
                for (int c = 0; c < 3; ++c)
                    pgrad += (w_form ? u.comp(c)[s] : adv.comp(c)[s]) *
                             e.grad[static_cast<std::size_t>(c)];
                press += 2.0 * pm[k] * pgrad;
                if (eps > 0.0 && !w_form) {
                    double jgrad = 0.0, jphigrad = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        jgrad += ju.comp(c)[s] * e.grad[static_cast<std::size_t>(c)];
                        jphigrad += ju.comp(c)[s] * grad_phi_eps_f.comp(c)[s];
                    }
                    const double fm = u2 * phi_eps_f[k] * jgrad;
                    const double pe = -u2 * e.val * jphigrad;
                    flux_moll += fm;
                    phi_term += pe;
                    comm += std::abs(u2 * advgrad - fm - pe);
                }
                if (w_form && !slei_coupling) {
                    // 2 V . (v.grad)(w xi) = 2 V_i v_j (d_j w_i xi + w_i d_j xi)
                    double acc = 0.0;
                    for (int i = 0; i < 3; ++i) {
                        double vj_djwi = 0.0, vj_djxi = 0.0;
                        for (int j = 0; j < 3; ++j) {
                            vj_djwi += adv.comp(j)[s] * gu.comp(j, i)[s];
                            vj_djxi += adv.comp(j)[s] * e.grad[static_cast<std::size_t>(j)];
                        }
                        acc += V->comp(i)[s] * (vj_djwi * e.val + u.comp(i)[s] * vj_djxi);
                    }
                    coup += 2.0 * acc;
                }
                if (w_form && slei_coupling) {
                    // -2 (v.grad)V . w xi
                    double acc = 0.0;
                    for (int i = 0; i < 3; ++i) {
                        double vgradVi = 0.0;
                        for (int j = 0; j < 3; ++j)
                            vgradVi += adv.comp(j)[s] * (*gV).comp(j, i)[s];
                        acc += vgradVi * u.comp(i)[s] * e.val;
                    }
                    coup += -2.0 * acc;
                }
            }

            auto& r = reports[f];
            const double tm = field.times()[m];
            const double wt = w_theta[f][m - first];
            const double wdt = w_dtheta[f][m - first];
            if (m == first) r.rhs_initial = sq_val * h3 * tfs[f].theta(tm);
            if (m == last) r.lhs_energy = sq_val * h3 * tfs[f].theta(tm);
            diss_acc[f] += 2.0 * wt * diss * h3;
            r.rhs_dt += wdt * sq_val * h3;
            r.rhs_lap += wt * sq_lap * h3;
            r.rhs_flux += wt * flux * h3;
            r.rhs_flux_moll += wt * flux_moll * h3;
            r.rhs_phi_eps += wt * phi_term * h3;
            r.rhs_pressure += wt * press * h3;
            r.rhs_coupling += wt * coup * h3;
            r.moll_commutator += std::abs(wt) * comm * h3;
        }
    }

    for (std::size_t f = 0; f < F; ++f) {
        auto& r = reports[f];
        r.lhs_dissipation = diss_acc[f];
        const double lhs = r.lhs_energy + r.lhs_dissipation;
        const double common = r.rhs_initial + r.rhs_dt + r.rhs_lap + r.rhs_pressure + r.rhs_coupling;
        r.slack_ineq = common + r.rhs_flux - lhs;
        if (eps > 0.0 && !w_form)
            r.slack_eq = common + r.rhs_flux_moll + r.rhs_phi_eps - lhs;
        else
            r.slack_eq = r.slack_ineq;
    }
    return reports;
}

}  // namespace

std::vector<LEIReport> lei_eval(const Trajectory& traj, const std::vector<ScalarField>& p,
                                const std::vector<TestFunction>& tfs, double t, double eps,
                                double budget) {
    return lei_engine(traj, nullptr, nullptr, p, tfs, traj.times().front(), t, eps, budget,
                      false, false);
}

std::vector<LEIReport> lei_w_eval(const Trajectory& w_traj, const Trajectory& V_traj,
                                  const Trajectory& v_traj, const std::vector<ScalarField>& p,
                                  const std::vector<TestFunction>& tfs, double t, double eps,
                                  double budget) {
    for (const auto& tf : tfs)
        if (!tf.vanishes_at_zero())
            throw ValidationError("lei_w_eval: test functions must vanish near t=0");
    return lei_engine(w_traj, &V_traj, &v_traj, p, tfs, w_traj.times().front(), t, eps, budget,
                      true, false);
}

std::vector<LEIReport> slei_eval(const Trajectory& v_traj, const std::vector<ScalarField>& p,
                                 const std::vector<TestFunction>& tfs, double t0, double t,
                                 double eps, double budget) {
    return lei_engine(v_traj, nullptr, nullptr, p, tfs, t0, t, eps, budget, false, false);
}

std::vector<LEIReport> slei_w_eval(const Trajectory& w_traj, const Trajectory& V_traj,
                                   const Trajectory& v_traj, const std::vector<ScalarField>& p,
                                   const std::vector<TestFunction>& tfs, double t0, double t,
                                   double eps, double budget) {
    return lei_engine(w_traj, &V_traj, &v_traj, p, tfs, t0, t, eps, budget, true, true);
}

DecayMonitorReport decay_monitor(const Trajectory& w_traj, const VectorField& w0,
                                 const std::vector<double>& R_list,
                                 const std::vector<double>& t_list) {
    const Grid& g = w_traj.grid();
    for (double R : R_list)
        if (R > g.half_length() / 4.0 + 1e-12)
            throw ValidationError("decay_monitor: R exceeds L/4");
    DecayMonitorReport rep;
    rep.R_list = R_list;
    rep.t_list = t_list;

    std::vector<ScalarField> chis;
    for (double R : R_list) chis.push_back(chi_field(g, R));
    for (std::size_t r = 0; r < R_list.size(); ++r)
        rep.m0.push_back(lq_uloc(multiply(w0, chis[r]), 2.0).value);

    for (double t : t_list) {
        const std::size_t m = w_traj.index_of(t);
        std::vector<double> row;
        for (std::size_t r = 0; r < R_list.size(); ++r)
            row.push_back(lq_uloc(multiply(w_traj.snapshot(m), chis[r]), 2.0).value);
        rep.m.push_back(std::move(row));
    }

    for (std::size_t ti = 0; ti < t_list.size(); ++ti)
        for (std::size_t r = 0; r < R_list.size(); ++r) {
            const double denom = std::pow(t_list[ti], 0.05) + rep.m0[r];
            if (denom > 0.0) rep.C0 = std::max(rep.C0, rep.m[ti][r] / denom);
        }

    // log-log slope of m(t, R_max) against t
    double sx = 0, sy = 0, sxx = 0, sxy = 0, nn = 0;
    for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
        const double mval = rep.m[ti].back();
        if (mval <= 0.0) continue;
        const double lx = std::log(t_list[ti]);
        const double ly = std::log(mval);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        nn += 1.0;
    }
    if (nn >= 2.0) rep.slope_at_Rmax = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return rep;
}

DecayProfile gradV_decay_profile(const VectorField& u0, double t0,
                                 const std::vector<Vec3>& probes) {
    const Grid& g = u0.grid();
    if (t0 <= 0.0) throw ValidationError("gradV_decay_profile: t0 must be positive");
    DecayProfile prof;
    prof.probes = probes;
    prof.values.assign(probes.size(), 0.0);

    std::vector<double> t_samples;
    for (double t = t0; t <= 1.0 + 1e-12; t *= 1.6) t_samples.push_back(t);
    if (t_samples.back() < 1.0) t_samples.push_back(1.0);

    const auto& stencil = g.ball_stencil(1.0);
    for (double t : t_samples) {
        const VectorField Vt = heat_apply(u0, t);
        const TensorField gV = gradient(Vt);
        RealVec mag(static_cast<std::size_t>(g.num_nodes()));
        parallel_for(g.num_nodes(), [&](std::int64_t i) {
            double acc = 0.0;
            for (int c = 0; c < 9; ++c) {
                const double v = gV.comp(c)[static_cast<std::size_t>(i)];
                acc += v * v;
            }
            mag[static_cast<std::size_t>(i)] = std::sqrt(acc);
        });
        std::vector<std::array<int, 3>> pn;
        for (const auto& pr : probes)
            pn.push_back({g.wrap_node(pr[0]), g.wrap_node(pr[1]), g.wrap_node(pr[2])});
        std::vector<double> vals;
        core::ball_pow_sweep(g, mag, pn, stencil, 0.0, vals);
        for (std::size_t i = 0; i < probes.size(); ++i)
            prof.values[i] = std::max(prof.values[i], vals[i]);
    }

    prof.monotone = true;
    for (std::size_t i = 1; i < prof.values.size(); ++i)
        if (prof.values[i] > prof.values[i - 1] * (1.0 + 1e-12)) prof.monotone = false;
    prof.far_over_central =
        prof.values.empty() || prof.values.front() == 0.0
            ? 0.0
            : prof.values.back() / prof.values.front();
    return prof;
}

EpProfileReport ep_membership_profile(const Trajectory& w_traj, const std::vector<Vec3>& probes,
                                      const std::vector<double>& pcheck_l32, double t1,
                                      double threshold_rel) {
    const Grid& g = w_traj.grid();
    const auto [first, last] = w_traj.window(t1, w_traj.times().back());
    const auto& st = g.ball_stencil(1.5);
    const double h3 = std::pow(g.spacing(), 3.0);
    const auto weights = trapezoid_weights(w_traj.times(), first, last);

    EpProfileReport rep;
    rep.rows.resize(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        rep.rows[i].probe = probes[i];
        if (i < pcheck_l32.size()) rep.rows[i].pcheck_l32 = pcheck_l32[i];
    }

    std::vector<std::array<int, 3>> pn;
    for (const auto& pr : probes)
        pn.push_back({g.wrap_node(pr[0]), g.wrap_node(pr[1]), g.wrap_node(pr[2])});

    std::vector<double> l3acc(probes.size(), 0.0), gacc(probes.size(), 0.0);
    for (std::size_t m = first; m <= last; ++m) {
        const RealVec mag = magnitude_field(w_traj.snapshot(m));
        std::vector<double> v2, v3;
        core::ball_pow_sweep(g, mag, pn, st, 2.0, v2);
        core::ball_pow_sweep(g, mag, pn, st, 3.0, v3);
        const TensorField gw = gradient(w_traj.snapshot(m));
        RealVec gmag(static_cast<std::size_t>(g.num_nodes()));
        parallel_for(g.num_nodes(), [&](std::int64_t i) {
            double acc = 0.0;
            for (int c = 0; c < 9; ++c) {
                const double v = gw.comp(c)[static_cast<std::size_t>(i)];
                acc += v * v;
            }
            gmag[static_cast<std::size_t>(i)] = std::sqrt(acc);
        });
        std::vector<double> g2;
        core::ball_pow_sweep(g, gmag, pn, st, 2.0, g2);
        for (std::size_t i = 0; i < probes.size(); ++i) {
            rep.rows[i].linf_l2 = std::max(rep.rows[i].linf_l2, std::sqrt(v2[i] * h3));
            l3acc[i] += weights[m - first] * v3[i] * h3;
            gacc[i] += weights[m - first] * g2[i] * h3;
        }
    }
    for (std::size_t i = 0; i < probes.size(); ++i) {
        rep.rows[i].l3 = std::cbrt(l3acc[i]);
        rep.rows[i].grad_l2 = std::sqrt(gacc[i]);
    }

    rep.all_decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i - 1];
        const auto& b = rep.rows[i];
        if (b.linf_l2 > a.linf_l2 * (1.0 + 1e-9) || b.l3 > a.l3 * (1.0 + 1e-9) ||
            b.grad_l2 > a.grad_l2 * (1.0 + 1e-9) || b.pcheck_l32 > a.pcheck_l32 * (1.0 + 1e-9))
            rep.all_decreasing = false;
    }
    if (!rep.rows.empty()) {
        const auto& h = rep.rows.front();
        const auto& tl = rep.rows.back();
        rep.below_thresholds = tl.linf_l2 <= threshold_rel * h.linf_l2 + 1e-14 &&
                               tl.l3 <= threshold_rel * h.l3 + 1e-14 &&
                               tl.grad_l2 <= threshold_rel * h.grad_l2 + 1e-14 &&
                               tl.pcheck_l32 <= threshold_rel * h.pcheck_l32 + 1e-14;
    }
    return rep;
}

}  // namespace ulf
