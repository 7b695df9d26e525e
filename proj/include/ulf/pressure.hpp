/// @file pressure.hpp
/// @brief Pressure representations: global spectral pressure, the local
///        decomposition phat_{x0} with c_{x0}(t), the new decomposition
///        pcheck_{x0} with q_{x0}(t), and consistency/variance verdicts.

#pragma once

#include <optional>

#include "ulf/kernels.hpp"
#include "ulf/trajectory.hpp"

namespace ulf {

struct PressureReport {
    Vec3 x0 = {0, 0, 0};
    std::vector<double> times;
    std::vector<LocalBall> local;    ///< phat or pcheck samples on B(x0,3/2)
    std::vector<double> c_series;    ///< c_{x0}(t) or q_{x0}(t) (ball average)
    std::vector<double> variance;    ///< spatial max-min of p - local part
    std::vector<double> tail_bound;  ///< truncation bound per sample
    double l32_norm = 0.0;           ///< ||local||_{L^{3/2}(ball x window)}
    double v_u33_sq = 0.0;           ///< ||v||^2_{U^{3,3}} over the window
    double ratio = 0.0;
    bool pass = false;
    double tol = 0.0;
    std::vector<double> qtilde, qhat;  ///< pcheck constants per sample
    double qsum_envelope = 0.0;        ///< max(|qtilde|+|qhat|) / ||V||^2_{U^{inf,2}}
};

/// p = (-lap)^{-1} d_i d_j N_ij per snapshot, zero box mean.
std::vector<ScalarField> pressure_spectral(const std::vector<TensorField>& N);

/// Local pressure via the three-term formula with source tensor N:
///   -(1/3) tr N(x) + pv over B(x0,2) + far-field difference.
LocalBall local_pressure_three_term(const TensorField& N, const Vec3& x0, double* tail = nullptr);

/// phat_{x0} on B(x0, 3/2) at the sampled snapshot indices (empty = all),
/// with N = v (x) v. Reports the L^{3/2} norm over the ball-cylinder and
/// its ratio to ||v||^2_{U^{3,3}}.
PressureReport phat_local(const Trajectory& v_traj, const Vec3& x0,
                          std::vector<std::size_t> tidx = {});

/// Same with a caller-supplied tensor per snapshot (the mollified N^eps).
PressureReport phat_local_tensor(const Trajectory& v_traj, const std::vector<TensorField>& N,
                                 const Vec3& x0, std::vector<std::size_t> tidx = {});

/// Verifies p = phat_{x0} + c_{x0}(t): c is the ball average of d = p - phat,
/// the verdict compares the spatial max-min of d with
/// tol_press (1 + ||v||^2_{U^{3,3}}). N_moll switches to the mollified phat.
PressureReport decomposition_check(const std::vector<ScalarField>& p, const Trajectory& v_traj,
                                   const Vec3& x0, double tol_press,
                                   std::vector<std::size_t> tidx = {},
                                   const std::vector<TensorField>* N_moll = nullptr);

/// The explicit three-integral formula for c_{x0}(t) relative to the
/// anchor c_0 = 0 (the formula's own normalization); n is the dyadic
/// radius with B(x0,3/2) in B_{2^n} in the box.
std::vector<double> cx0_direct(const Trajectory& v_traj, const Vec3& x0, int n_dyadic,
                               std::vector<std::size_t> tidx = {});

/// pcheck_{x0} of the new decomposition: three F-terms plus the three
/// G-terms built on rho_2; q_{x0}(t) from the supplied spectral pressure.
/// tau is validated here (tau > 4, rho_tau support inside the box); the
/// re-split itself lives in pcheck_g_resplit.
PressureReport pcheck_local(const Trajectory& w_traj, const Trajectory& V_traj,
                            const std::vector<ScalarField>& p, const Vec3& x0, double tol_press,
                            std::optional<double> tau = std::nullopt,
                            std::vector<std::size_t> tidx = {});

struct GResplitReport {
    double g1_l32 = 0.0, g2_l32 = 0.0, g3_l32 = 0.0;
    double regroup_gap = 0.0;  ///< sup |(G2+G3) - rho_2 far/shell terms|
};

/// The tau re-split of the G-part (rho_tau against rho_2): evaluates
/// p^{G,1}, p^{G,2}, p^{G,3} and checks that G2+G3 regroups exactly into
/// the rho_2 far and shell terms. Needs 1.5 tau + |x0|_inf <= L.
GResplitReport pcheck_g_resplit(const Trajectory& V_traj, const Vec3& x0, double tau,
                                std::vector<std::size_t> tidx = {});

/// sup over the ball and sampled times of |phat - pcheck - qtilde - qhat|
/// (the Lemma 4.1 pointwise identity, up to quadrature).
double pressure_identity_gap(const Trajectory& w_traj, const Trajectory& V_traj, const Vec3& x0,
                             std::vector<std::size_t> tidx = {});

}  // namespace ulf
