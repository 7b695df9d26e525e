/// @file norms.hpp
/// @brief Uniformly-local norms, U^{s,p} space-time norms, the local energy
///        norm, tail profiles and mollification.
///
/// Sups over R^3 are taken over a probe-center lattice of stride <= 1/2
/// (node-aligned); ball norms are node-indicator sums (midpoint rule).
/// A fine-stride (stride h) sweep is available as the oracle path.

#pragma once

#include <limits>
#include <string>

#include "ulf/cutoff.hpp"
#include "ulf/field.hpp"
#include "ulf/trajectory.hpp"

namespace ulf {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NormReport {
    std::string name;
    double value = 0.0;
    Vec3 witness = {0, 0, 0};
    double q = 0.0, s = 0.0;
    double t0 = 0.0, t1 = 0.0;
    std::size_t n_centers = 0;
    double summand_a = 0.0;  ///< energy norm: U^{inf,2} part
    double summand_b = 0.0;  ///< energy norm: U^{2,2} gradient part
};

/// Node-aligned probe lattice of a given stride; stride=0 means every node.
std::vector<std::array<int, 3>> probe_lattice(const Grid& g, double stride);

/// sup over probe centers of || f ||_{L^q(B(x0,1))}; q = kInf is node max.
NormReport lq_uloc(const ScalarField& f, double q, double stride = 0.5);
NormReport lq_uloc(const VectorField& f, double q, double stride = 0.5);

/// Nodewise |f| magnitude (the common input of all ball sweeps).
RealVec magnitude_field(const ScalarField& f);
RealVec magnitude_field(const VectorField& f);

/// sup_{x0} (int_{t0}^{t1} ||u||_{L^p(B_1(x0))}^s dt)^{1/s} from per-snapshot
/// magnitude fields and trapezoid weights on the window.
NormReport usp_from_magnitudes(const Grid& g, const std::vector<const RealVec*>& mags,
                               const std::vector<double>& weights, double s, double p,
                               double stride = 0.5);

NormReport usp_norm(const Trajectory& traj, double s, double p, double t0, double t1,
                    double stride = 0.5);

/// ||u||_{E(t0,t1)} = ||u||_{U^{inf,2}} + ||grad u||_{U^{2,2}}, gradient
/// spectral per snapshot. Returns the sum and both summands.
NormReport energy_norm(const Trajectory& traj, double t0, double t1, double stride = 0.5);

struct TailPoint {
    double R;
    double value;
};

struct TailProfile {
    std::vector<TailPoint> points;
    bool monotone = false;
    bool decayed = false;  ///< monotone and final value below threshold
};

/// For each R: sup of ball L^q norms over probe centers with |x0| >= R.
/// Verdict threshold is relative to the first profile value.
TailProfile tail_profile(const VectorField& f, double q, const std::vector<double>& R_list,
                         double threshold_rel = 0.05);
TailProfile tail_profile(const ScalarField& f, double q, const std::vector<double>& R_list,
                         double threshold_rel = 0.05);

/// Periodic mollification with the discrete-renormalized eta_eps.
ScalarField mollify(const ScalarField& f, double eps);
VectorField mollify(const VectorField& f, double eps);

/// v * chi (scalar multiplier on every component).
VectorField multiply(const VectorField& v, const ScalarField& chi);

struct UspCounterexample {
    double usp_value = 0.0;                  ///< U^{s,p}, constant in K
    std::vector<double> increments;          ///< per dyadic slab, = c_p^{s/p}/2
    std::vector<double> partial_sums;        ///< running L^s L^p_uloc integral
    double c_p_discrete = 0.0;               ///< discrete ||1||^p_{L^p(B_1)}
};

/// Example with u = 2^{k/s} on B_1(x_k) x (t0, t0 + 2^{-k}): finite U^{s,p}
/// norm but linearly growing L^s(t0,t;L^p_uloc) partial sums.
UspCounterexample usp_counterexample(const Grid& g, double s, double p, double t0, double t,
                                     int K);

}  // namespace ulf
