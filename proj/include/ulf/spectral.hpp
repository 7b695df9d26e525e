/// @file spectral.hpp
/// @brief Spectral-space operators: transforms, derivatives, Helmholtz
///        projection, heat multipliers, inverse Laplacian.
///
/// Derivative multipliers zero the Nyquist mode. The gradient tensor
/// convention is grad(v)(i,j) = d_i v_j; the tensor divergence convention
/// is (div F)_i = d_j F_{ji} (contraction on the first index).

#pragma once

#include "ulf/field.hpp"

namespace ulf {

CplxVec fft_scalar(const ScalarField& f);
ScalarField ifft_scalar(const Grid& g, const CplxVec& spec, double time = 0.0);

SpectralVec to_spectral(const VectorField& v);
VectorField to_real(const SpectralVec& s);

/// Loop helper over the half spectrum; fn(ix, iy, kz, linear index).
void for_each_mode(const Grid& g, const std::function<void(int, int, int, std::int64_t)>& fn);

/// e^{-|k|^2 t} multiplier table over the half spectrum.
RealVec heat_symbol(const Grid& g, double t);

/// Apply a real symbol table in place to all components.
void apply_symbol(SpectralVec& v, const RealVec& sym);
void apply_symbol(CplxVec& spec, const RealVec& sym);

/// In-place Helmholtz (Leray) projection: vhat -= k (k.vhat)/|k|^2.
void leray_project_spec(SpectralVec& v);

/// d_c of a scalar spectrum.
CplxVec derivative_spec(const Grid& g, const CplxVec& spec, int c);

/// Gradient tensor of a vector field, grad(i,j) = d_i v_j (spectral).
TensorField gradient(const VectorField& v);
/// Gradient of a scalar field.
VectorField gradient(const ScalarField& f);

/// Spectral divergence of a vector field.
ScalarField divergence(const VectorField& v);

/// Tensor divergence (div F)_i = d_j F_{ji}, returned in spectral form.
SpectralVec divergence_spec(const TensorField& F);

/// Zero-mean inverse Laplacian of -(d_i d_j N_ij): the spectral pressure
/// solve -lap p = d_i d_j N_ij with zero box mean.
ScalarField poisson_pressure(const TensorField& N);

/// Nodewise max |div v| (spectral divergence), for solenoidality checks.
double max_divergence(const VectorField& v);

}  // namespace ulf
