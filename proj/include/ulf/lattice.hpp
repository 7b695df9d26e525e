/// @file lattice.hpp
/// @brief Divergence-free projection, initial-data generators, oscillation
///        functionals over balls and cubes.

#pragma once

#include <map>
#include <string>

#include "ulf/field.hpp"

namespace ulf {

/// Spectral Helmholtz projection. Idempotent, annihilates gradients,
/// leaves already-solenoidal fields unchanged.
VectorField leray_project(const VectorField& v);

enum class DataKind { CompactBump, Constant, SlowOscillationShear, Mixed };

DataKind data_kind_from_string(const std::string& s);
std::string to_string(DataKind k);

/// Generator parameters. Amplitudes and scales bound the data; `bound`
/// rejects u0 whose unit-ball L^3 norm exceeds it.
struct DataParams {
    double amp_bump = 0.2;      ///< compactly supported part amplitude
    double bump_radius = 0.0;   ///< support radius; 0 picks L/6
    double amp_shear = 0.25;    ///< non-decaying shear amplitude
    double c_g = 0.8;           ///< phase-scale c in g(s) = c sqrt(ln(2+s^2))
    Vec3 constant = {1.0, 0.0, 0.0};
    double bound = 16.0;        ///< cap on ||u0||_{L^3(B_1)}
};

/// The designated split v0 = w0 + u0: w0 compactly supported (discrete
/// E^2_sigma surrogate, support within L/4), u0 the non-decaying part.
struct InitialData {
    VectorField v0;
    VectorField w0;
    VectorField u0;
};

InitialData gen_initial_data(DataKind kind, const DataParams& params, const Grid& g);

/// Fixed-wavelength shear sin(k x2) e1: violates the oscillation-decay
/// condition; negative control for the decay monitors.
VectorField nondecaying_oscillation_control(const Grid& g, double amplitude, int mode = 4);

enum class Region { Ball, Cube };

/// Integral over the region of |v - (v)_region| by node quadrature.
/// Throws when the region exits the box.
double oscillation(const VectorField& v, const Vec3& x0, double r, Region region = Region::Ball);

struct OscillationRow {
    Vec3 center;
    double ball_r1;
    double cube_r1;
    double cube_r_inv_sqrt3;
};

struct OscillationEquivalenceReport {
    std::vector<OscillationRow> rows;
    double c_ball_le_cube;   ///< fitted C with ball <= C * cube(r=1)
    double c_cube_le_ball;   ///< fitted C with cube(r=3^{-1/2}) <= C * ball
};

/// Tabulates ball and cube oscillation at the given centers and fits the
/// two-sided comparability constants.
OscillationEquivalenceReport cube_ball_oscillation_equivalence(const VectorField& v,
                                                               const std::vector<Vec3>& centers);

/// Probe ladder along the +x2 axis from `from` to `to` (inclusive, step),
/// the discrete stand-in for |x0| -> infinity for shear-type data.
std::vector<Vec3> probe_ladder(double from, double to, double step);

}  // namespace ulf
