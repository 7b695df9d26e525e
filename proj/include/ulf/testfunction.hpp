/// @file testfunction.hpp
/// @brief Smooth compactly supported test functions with closed-form
///        derivatives, built from the quintic cutoff pieces.
///
/// Space and time factors are exposed separately: the spatial part is
/// evaluated once per node, the temporal factor is integrated exactly
/// against the snapshot hat functions (see theta_hat_weights), so ramp
/// quadrature never limits the weak-form accuracy.

#pragma once

#include <functional>
#include <string>

#include "ulf/field.hpp"

namespace ulf {

/// Scalar space-time test function xi(x) theta(t) for the energy
/// inequalities: xi is either bump(|x-x0|)^2 or bump(|x-x0|)^2 chi_R(x)^2,
/// theta is 1 or a quintic ramp vanishing near t = 0.
class TestFunction {
  public:
    struct Spatial {
        double val = 0.0;
        Vec3 grad = {0, 0, 0};
        double lap = 0.0;
    };
    struct Eval {
        double val = 0.0;
        Vec3 grad = {0, 0, 0};
        double lap = 0.0;
        double dt = 0.0;  ///< time derivative of the full product
    };

    /// xi = bump(|x-x0|)^2; support B(x0, 3/2).
    static TestFunction plateau(const Grid& g, const Vec3& x0);
    /// xi = bump(|x-x0|)^2 chi_R(x)^2.
    static TestFunction plateau_chi(const Grid& g, const Vec3& x0, double R);

    /// Multiplies by theta(t) rising from 0 on [t_on, t_on + w] (quintic).
    TestFunction& with_ramp(double t_on, double w);

    Spatial space(const Vec3& x) const;
    /// Cell average of the spatial factors over [x-h/2, x+h/2)^3 by 4^3
    /// Gauss-Legendre points; integrates the cutoff kinks accurately so
    /// node sums against smooth fields stay consistent under integration
    /// by parts.
    Spatial space_cell_avg(const Vec3& x) const;
    double theta(double t) const;
    double theta_dot(double t) const;
    Eval operator()(const Vec3& x, double t) const;

    const std::vector<std::int64_t>& support() const { return support_; }
    const std::string& id() const { return id_; }
    const Vec3& center() const { return x0_; }
    bool vanishes_at_zero() const { return t_on_ >= 0.0; }
    const Grid& grid() const { return grid_; }

  private:
    Grid grid_;
    Vec3 x0_ = {0, 0, 0};
    double R_ = 0.0;  ///< 0 = no chi factor
    double t_on_ = -1.0, t_w_ = 0.0;
    std::vector<std::int64_t> support_;
    std::string id_;
};

/// Hat-function weights of int theta(t) l_m(t) dt over the sub-grid
/// times[first..last] (per-interval Gauss-Legendre on theta). With
/// theta == 1 these reduce to the trapezoid weights.
std::vector<double> theta_hat_weights(const std::vector<double>& times, std::size_t first,
                                      std::size_t last, const std::function<double(double)>& theta);

/// Vector-valued weak-form test function zeta(x,t) = theta(t) * spatial
/// part, for the residual checks.
struct WeakTestFunction {
    struct Spatial {
        std::array<double, 3> vec;   ///< zeta_i spatial part
        std::array<double, 3> lap;   ///< lap of it
        std::array<double, 9> grad;  ///< d_j (.)_i at [3j+i]
        double div;
    };
    std::string id;
    std::vector<std::int64_t> support;
    std::function<Spatial(const Vec3&)> space;
    std::function<double(double)> theta;
    std::function<double(double)> theta_dot;
};

/// The fixed family used by residual_check: three directional bumps at two
/// centers plus one pure-gradient member (which sees the pressure), all with
/// a quintic time window inside (0, T).
std::vector<WeakTestFunction> weak_test_family(const Grid& g, double T);

}  // namespace ulf
