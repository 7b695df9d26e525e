/// @file solver.hpp
/// @brief The localized-mollified scheme: Picard mild solves, time-interval
///        gluing, the perturbation w = v - e^{t lap} u0, the weighted-space
///        h-solve and the L^2 energy W-solve.

#pragma once

#include <optional>

#include "ulf/kernels.hpp"
#include "ulf/norms.hpp"
#include "ulf/trajectory.hpp"

namespace ulf {

struct MildSolveConfig {
    double eps = 0.5;       ///< mollification/localization scale
    double T = 0.0;         ///< horizon; <= min(1, c eps^3 B^-2)
    double dt = 0.0;        ///< snapshot spacing; <= T/16
    double tol = 1e-8;      ///< fixed-point tolerance in discrete E_T
    int max_iter = 60;
    double c_picard = 1.0 / 64.0;  ///< the Picard window constant
    bool nonlinearity_enabled = true;
    double probe_stride = 0.5;

    /// Validates against the grid and the data bound B = ||v0||_{L^2_uloc}.
    void validate(const Grid& g, double B) const;
};

struct SolveInfo {
    double B = 0.0;                      ///< measured ||v0||_{L^2_uloc}
    int iterations = 0;
    bool converged = false;
    std::vector<double> displacement;    ///< per-iteration discrete E_T step
    double contraction = 0.0;            ///< max successive-displacement ratio
    double fixed_point_residual = 0.0;   ///< ||Psi(v)-v||_E after convergence
};

/// N^eps(v)_{jk} = J_eps(v)_j v_k Phi_eps, the localized-mollified
/// nonlinearity ((a x b)_{jk} = a_j b_k convention).
TensorField nonlinearity(const VectorField& v, double eps);

/// Picard iteration for v = e^{t lap} v0 - int_0^t e^{(t-s) lap} P div
/// N^eps(v) ds on the snapshot grid. Throws NumericalError when the map
/// fails to contract (advice: shrink T).
Trajectory picard_mild_solve(const VectorField& v0, const MildSolveConfig& cfg,
                             SolveInfo* info = nullptr);

/// One application of the Picard map to an arbitrary trajectory (the
/// fixed-point re-application check). times[0] carries the initial datum.
Trajectory picard_map(const Trajectory& traj, double eps);

/// Discrete E_T distance between two trajectories on the same time grid.
double trajectory_energy_distance(const Trajectory& a, const Trajectory& b, double stride = 0.5);

struct ResidualReport {
    double max_residual = 0.0;      ///< max over family of |r|/scale
    double max_abs_residual = 0.0;  ///< max over family of |r|
    std::vector<double> residuals;  ///< per test function, relative
};

/// Weak-form residual of the localized-mollified system over a fixed family
/// of smooth compactly supported space-time test functions. eps = 0 checks
/// the plain Navier-Stokes form (N = v x v). p holds one pressure snapshot
/// per trajectory time.
ResidualReport residual_check(const Trajectory& traj, const std::vector<ScalarField>& p,
                              double eps);

struct GlueInfo {
    std::vector<double> seams;        ///< restart times
    std::vector<SolveInfo> segments;
    double seam_consistency = 0.0;    ///< re-evaluated integral-equation gap
};

/// Extends a fixed point on [0,S] to [0,T_total] by restarting at
/// tau = 7S/8 and gluing; the glued trajectory satisfies the integral
/// equation across the seam.
Trajectory extend_glue(const Trajectory& traj, const MildSolveConfig& cfg, double T_total,
                       GlueInfo* info = nullptr);

/// w(t) = v(t) - e^{t lap} u0 snapshotwise.
Trajectory perturb_w(const Trajectory& traj, const VectorField& u0);

/// Heat-flow trajectory of u0 on the same time grid.
Trajectory heat_trajectory(const VectorField& u0, const std::vector<double>& times);

struct WeightedSolveState {
    double t0 = 0.0;
    double S = 0.0;
    Trajectory h;
    double f_norm = 0.0;        ///< U^{inf,4} part + sup (t-t0)^{3/8} |h|_inf part
    double f_norm_uinf4 = 0.0;
    double f_norm_weighted = 0.0;
    int iterations = 0;
    double contraction = 0.0;
    double M = 0.0;             ///< ||V||_{L^inf(I x R^3)}
};

/// Picard solve of h = e^{(t-t0) lap} h0 - int_t0^t e^{(t-s) lap} P div
/// (J_eps H x H Phi_eps) ds, H = V + h, in the weighted F norm. V_traj
/// supplies the snapshot grid (its times restricted to [t0, t0+S]).
WeightedSolveState h_weighted_solve(const VectorField& h0, const Trajectory& V_traj, double t0,
                                    double S, double eps, double delta);

struct EnergySolveInfo {
    std::vector<double> energy_lhs;    ///< |W(t)|^2 + 2 int |grad W|^2
    std::vector<double> energy_rhs;    ///< |W0|^2 + measured forcing work
    double max_energy_slack = 0.0;     ///< max(lhs - rhs)
    double gronwall_C = 0.0;           ///< min C with lhs <= e^{C(1+M1)t}|W0|^2
    double M1 = 0.0;                   ///< ||grad V||_inf over the window
};

/// Integrating-factor RK2 spectral march of the mollified perturbed system
/// for W with background H (no localization factor). Throws NumericalError
/// on norm blow-up (x10).
Trajectory split_w_solve(const VectorField& W0, const Trajectory& H_traj, double t0, double S,
                         double eps, EnergySolveInfo* info = nullptr);

}  // namespace ulf
