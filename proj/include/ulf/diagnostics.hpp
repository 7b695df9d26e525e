/// @file diagnostics.hpp
/// @brief Local energy inequality evaluators (plain, perturbation and
///        strong variants), decay monitors for w and grad V, and the
///        E^p-membership profiler.
///
/// All verdicts are budgeted: the inequality is exact only in the
/// continuum, so every report carries its slack together with the budget
/// it was judged against, never a bare boolean.

#pragma once

#include "ulf/testfunction.hpp"
#include "ulf/trajectory.hpp"

namespace ulf {

struct LEIReport {
    std::string tf_id;
    double t0 = 0.0, t = 0.0;
    double lhs_energy = 0.0;       ///< int |v|^2 xi(x,t)
    double lhs_dissipation = 0.0;  ///< 2 int int |grad v|^2 xi
    double rhs_initial = 0.0;      ///< int |v(t0)|^2 xi(x,t0)
    double rhs_dt = 0.0;           ///< int int |v|^2 d_s xi
    double rhs_lap = 0.0;          ///< int int |v|^2 lap xi
    double rhs_flux = 0.0;         ///< int int |v|^2 (v.grad) xi
    double rhs_flux_moll = 0.0;    ///< int int |v|^2 Phi_eps (J_eps v.grad) xi
    double rhs_phi_eps = 0.0;      ///< -int int |v|^2 xi (J_eps v.grad) Phi_eps
    double rhs_pressure = 0.0;     ///< 2 int int p (v.grad) xi
    double rhs_coupling = 0.0;     ///< w-form: 2 int int V.(v.grad)(w xi) or slei-w term
    double slack_eq = 0.0;         ///< mollified equality: rhs_moll - lhs
    double slack_ineq = 0.0;       ///< paper inequality form: rhs - lhs
    double moll_commutator = 0.0;  ///< measured |plain - mollified| flux scale
    double budget = 0.0;
};

/// Plain LEI (3.1) and the mollified local energy equality with the two
/// extra Phi_eps terms, itemized. eps = 0 evaluates the plain form only
/// (flux_moll = flux, commutator 0). One sweep serves all test functions.
std::vector<LEIReport> lei_eval(const Trajectory& traj, const std::vector<ScalarField>& p,
                                const std::vector<TestFunction>& tfs, double t, double eps,
                                double budget);

/// LEI for the perturbation w (4.4); test functions must vanish near t=0.
std::vector<LEIReport> lei_w_eval(const Trajectory& w_traj, const Trajectory& V_traj,
                                  const Trajectory& v_traj, const std::vector<ScalarField>& p,
                                  const std::vector<TestFunction>& tfs, double t, double eps,
                                  double budget);

/// Strong LEI (4.7) restarted from the snapshot time t0; t0 = 0 reduces to
/// the plain form. w_form switches to (4.8) with the -2 (v.grad)V . w xi
/// coupling (V_traj and w_traj required then).
std::vector<LEIReport> slei_eval(const Trajectory& v_traj, const std::vector<ScalarField>& p,
                                 const std::vector<TestFunction>& tfs, double t0, double t,
                                 double eps, double budget);
std::vector<LEIReport> slei_w_eval(const Trajectory& w_traj, const Trajectory& V_traj,
                                   const Trajectory& v_traj, const std::vector<ScalarField>& p,
                                   const std::vector<TestFunction>& tfs, double t0, double t,
                                   double eps, double budget);

struct DecayMonitorReport {
    std::vector<double> t_list, R_list;
    std::vector<std::vector<double>> m;   ///< m[t][R] = ||w(t) chi_R||_{L^2_uloc}
    std::vector<double> m0;               ///< ||w0 chi_R||_{L^2_uloc}
    double C0 = 0.0;                      ///< minimal C with m <= C (t^{1/20} + m0)
    double slope_at_Rmax = 0.0;           ///< log-log slope of m(t, R_max) vs t
};

/// Lemma 4.5 monitor: m(t,R) tabulation, minimal C0, and the t^{1/20}
/// exponent check at the largest R.
DecayMonitorReport decay_monitor(const Trajectory& w_traj, const VectorField& w0,
                                 const std::vector<double>& R_list,
                                 const std::vector<double>& t_list);

struct DecayProfile {
    std::vector<Vec3> probes;
    std::vector<double> values;
    bool monotone = false;
    double far_over_central = 0.0;
};

/// sup over t in [t0, 1] of the ball sup-norm of grad V at each probe,
/// V the heat flow of u0.
DecayProfile gradV_decay_profile(const VectorField& u0, double t0, const std::vector<Vec3>& probes);

struct EpProfileRow {
    Vec3 probe;
    double linf_l2 = 0.0;   ///< L^inf_t L^2_x over the cylinder
    double l3 = 0.0;        ///< L^3 over the cylinder
    double grad_l2 = 0.0;   ///< ||grad w||_{L^2}
    double pcheck_l32 = 0.0;
};

struct EpProfileReport {
    std::vector<EpProfileRow> rows;
    bool all_decreasing = false;
    bool below_thresholds = false;
};

/// Hypothesis quantities of the decay proposition per probe cylinder
/// Q = B(x0,3/2) x (t1, T); pcheck norms supplied by the pressure module.
EpProfileReport ep_membership_profile(const Trajectory& w_traj, const std::vector<Vec3>& probes,
                                      const std::vector<double>& pcheck_l32, double t1,
                                      double threshold_rel = 0.5);

}  // namespace ulf
