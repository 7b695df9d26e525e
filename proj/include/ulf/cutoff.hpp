/// @file cutoff.hpp
/// @brief Bump profile, scaled cutoffs, mollifier, temporal ramps.
///
/// The radial profile is a quintic plateau: bump(r) = 1 for r <= 1,
/// bump(r) = P(2(r-1)) on (1, 3/2) with P the unique quintic having
/// P(0)=1, P(1)=0 and vanishing first/second derivatives at both ends,
/// and bump(r) = 0 for r >= 3/2. All scalings derive from this one
/// closed form so every evaluation is bit-reproducible.

#pragma once

#include "ulf/field.hpp"

namespace ulf {

namespace cutoff {

/// Quintic step: s in [0,1] -> 1..0 with two flat derivatives at the ends.
double step(double s);
double step_d(double s);
double step_dd(double s);

/// Radial plateau profile and its first two radial derivatives.
double bump(double r);
double bump_d(double r);
double bump_dd(double r);

/// Rising ramp: 0 for s <= 1, 1 for s >= 2, nondecreasing quintic between.
double ramp(double s);
double ramp_d(double s);

/// chi_R profile at radius r: 1 - bump(r/R). Zero for r <= R, one for
/// r >= 3R/2.
inline double chi(double r, double R) { return 1.0 - bump(r / R); }

/// Normalized mollifier profile (1-r^2)^3-type, supported in r < 1,
/// integrating to one over R^3.
double eta(double r);

}  // namespace cutoff

/// Discrete mollifier of scale eps: node samples of eta_eps renormalized so
/// the node sum times h^3 equals one exactly, plus its convolution symbol.
class Mollifier {
  public:
    /// eps >= 2h required so the mollifier is resolvable.
    static Mollifier make(const Grid& g, double eps);

    const Grid& grid() const { return grid_; }
    double eps() const { return eps_; }
    /// Convolution symbol (FFT of the discrete kernel times h^3).
    const RealVec& symbol() const { return symbol_; }
    /// Discrete renormalized kernel field.
    const ScalarField& kernel() const { return kernel_; }

    ScalarField apply(const ScalarField& f) const;
    VectorField apply(const VectorField& f) const;

    /// Direct real-space convolution over the kernel support (oracle path).
    ScalarField apply_direct(const ScalarField& f) const;

  private:
    Grid grid_;
    double eps_ = 0.0;
    RealVec symbol_;
    ScalarField kernel_;
};

/// Phi_eps(x) = bump(eps |x|), the localization factor of scale 1/eps.
ScalarField phi_eps_field(const Grid& g, double eps);
/// Nabla Phi_eps (closed form).
VectorField grad_phi_eps_field(const Grid& g, double eps);

/// chi_R(x) = 1 - bump(|x|/R).
ScalarField chi_field(const Grid& g, double R);

/// bump(|x - x0| / scale) around a center.
ScalarField bump_field(const Grid& g, const Vec3& x0, double scale = 1.0);

}  // namespace ulf
