/// @file kernels_core.hpp
/// @brief Hot node-level kernels, OpenMP-parallel with serial reference twins.
///
/// The parallel versions are the production path. The `*_serial` twins are
/// the reference implementations kept for testing (bitwise equality for any
/// worker count) and for tools/bench_kernels.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ulf/fft.hpp"
#include "ulf/grid.hpp"

namespace ulf::core {

/// out = a .* b
void nodewise_multiply(RealVec& out, const RealVec& a, const RealVec& b);
void nodewise_multiply_serial(RealVec& out, const RealVec& a, const RealVec& b);

/// out = a .* b .* c
void nodewise_multiply3(RealVec& out, const RealVec& a, const RealVec& b, const RealVec& c);
void nodewise_multiply3_serial(RealVec& out, const RealVec& a, const RealVec& b, const RealVec& c);

/// y = alpha*x + beta*y
void axpby(double alpha, const RealVec& x, double beta, RealVec& y);
void axpby_serial(double alpha, const RealVec& x, double beta, RealVec& y);

/// Slabbed pairwise sum of all entries (bitwise worker-independent).
double field_sum(const RealVec& a, int nslabs);
double field_sum_serial(const RealVec& a, int nslabs);

double field_max_abs(const RealVec& a, int nslabs);
double field_max_abs_serial(const RealVec& a, int nslabs);

/// Complex spectrum times real symbol: out = spec .* sym.
void spectral_scale(CplxVec& out, const CplxVec& spec, const RealVec& sym);
void spectral_scale_serial(CplxVec& out, const CplxVec& spec, const RealVec& sym);

/// For each probe node (ix,iy,iz): sum of absfield[y]^p over the ball
/// stencil around it (periodic wrap), serial in stencil order per probe.
/// p == 0 means max over the stencil instead of a sum.
void ball_pow_sweep(const Grid& g, const RealVec& absfield,
                    const std::vector<std::array<int, 3>>& probes,
                    const std::vector<std::array<int, 3>>& stencil, double p,
                    std::vector<double>& out);
void ball_pow_sweep_serial(const Grid& g, const RealVec& absfield,
                           const std::vector<std::array<int, 3>>& probes,
                           const std::vector<std::array<int, 3>>& stencil, double p,
                           std::vector<double>& out);

}  // namespace ulf::core
