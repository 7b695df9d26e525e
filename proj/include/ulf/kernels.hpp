/// @file kernels.hpp
/// @brief Heat semigroup, Oseen tensor, Duhamel integral, Riesz kernels with
///        principal-value convolution, and the operator bound checks.
///
/// Production operators are spectral on the torus; the real-space kernel
/// forms (closed-form Oseen tensor, truncated quadratures) exist as
/// independent cross-check paths.

#pragma once

#include "ulf/field.hpp"
#include "ulf/norms.hpp"
#include "ulf/trajectory.hpp"

namespace ulf {

/// e^{t lap} f, spectral. t = 0 is the identity; preserves constants and the
/// node mean exactly; commutes with leray_project.
ScalarField heat_apply(const ScalarField& f, double t);
VectorField heat_apply(const VectorField& f, double t);

/// e^{t lap} P div F, spectral (t > 0). Tensor divergence contracts the
/// first index: (div F)_i = d_j F_{ji}.
VectorField oseen_apply(const TensorField& F, double t);

/// Direct free-space Oseen-kernel quadrature at selected probe nodes
/// (minimal-image displacement, singular node skipped).
std::vector<double> oseen_apply_direct(const TensorField& F, double t,
                                       const std::vector<std::array<int, 3>>& probes, int comp);

namespace oseen {
/// Free-space Oseen tensor S_ij(z,t) (closed erf form).
void tensor(const Vec3& z, double t, double S[3][3]);
/// dS[k][i][j] = d_{z_k} S_ij(z,t).
void tensor_grad(const Vec3& z, double t, double dS[3][3][3]);
}  // namespace oseen

/// Newtonian kernel K = 1/(4 pi |z|) and derivatives.
double riesz_K(const Vec3& z);
Vec3 riesz_Ki(const Vec3& z);
void riesz_Kij(const Vec3& z, double K[3][3]);

/// Duhamel integral int_0^t e^{(t-s) lap} P div F(s) ds on the snapshot
/// grid `times` (trapezoid on the integrand, exact semigroup factors).
/// times[0] is the lower limit; t must be the final entry.
VectorField duhamel(const std::vector<TensorField>& F, const std::vector<double>& times, double t);

/// Spectral form used inside the Picard solver: one recursion step
/// I <- E_dt I + (dt/2)(E_dt G_m + G_{m+1}) with G = P div F.
void duhamel_step(SpectralVec& I, const SpectralVec& G_prev, const SpectralVec& G_next,
                  const RealVec& heat_dt, double dt);

// ---------------------------------------------------------------------------
// Local ball evaluations (shared by the pressure decompositions)
// ---------------------------------------------------------------------------

/// Values on the node ball B(x0, r); x0 snaps to the nearest node.
struct LocalBall {
    Vec3 x0;
    std::array<int, 3> node;
    double r = 1.5;
    const std::vector<std::array<int, 3>>* offsets = nullptr;
    std::vector<double> values;
};

LocalBall make_local_ball(const Grid& g, const Vec3& x0, double r = 1.5);

/// Component Calderon-Zygmund operator on a ball source region:
///   -(delta_ij/3) g(x) + pv sum_{y in B(x0,r_src), y != x} K_ij(x-y) g(y) h^3,
/// evaluated on B(x0, 3/2). The pv of K_ij against a constant over the
/// omitted symmetric cell vanishes, so skipping it is exact for constants.
LocalBall riesz_pv_convolve(const ScalarField& g_src, const Vec3& x0, int i, int j,
                            double r_src = 2.0);

/// Tensor-contracted pv sum (no delta term): sum_ij pv K_ij * N_ij over
/// B(x0, r_src), on the evaluation ball.
void riesz_pv_tensor_near(const TensorField& N, LocalBall& eval, double r_src = 2.0);

/// Far-field difference sum_ij int_{|y-x0|>r_excl} (K_ij(x-y)-K_ij(x0-y))
/// N_ij(y) dy, truncated at the box (minimal image), FFT-accelerated.
/// Adds into eval.values; returns the reported analytic tail bound ~ C/L.
double riesz_far_difference(const TensorField& N, LocalBall& eval, double r_excl = 2.0);

/// Same without the sharp exclusion: the caller supplies the already-masked
/// tensor M (must vanish near x0, e.g. M = G (1 - rho_2)).
double riesz_far_difference_masked(const TensorField& M, LocalBall& eval);

// ---------------------------------------------------------------------------
// Bound checks
// ---------------------------------------------------------------------------

struct BoundSample {
    double x_norm;
    double t;
    double measured;
    double bound;
};

struct KernelBoundReport {
    std::string name;
    double fitted_C = 0.0;   ///< max measured/bound over the sample set
    double worst_ratio = 0.0;
    double slope = 0.0;      ///< log-log regression slope (oseen checks)
    std::size_t n_samples = 0;
    std::vector<BoundSample> samples;
};

/// Pointwise Oseen decay: |grad^l d_t^k S| <= C (|x|+sqrt(t))^{-3-l-2k},
/// measured on the discrete kernel with spectral differentiation.
/// (k,l) in {(0,0),(0,1),(1,0)}. Empty lists pick the published sample set.
KernelBoundReport oseen_bound_check(const Grid& g, int k_order, int l_order,
                                    std::vector<double> radii = {},
                                    std::vector<double> t_list = {});

/// ||e^{t lap} f||_{L^p_uloc} against (1 + t^{-(3/2)(1/q-1/p)}) ||f||_{L^q_uloc}.
KernelBoundReport heat_uloc_bound_check(const VectorField& f, double q, double p,
                                        const std::vector<double>& t_samples);

/// Same for e^{t lap} P div F with the extra t^{-1/2} factor.
KernelBoundReport oseen_uloc_bound_check(const TensorField& F, double q, double p,
                                         const std::vector<double>& t_samples);

}  // namespace ulf
