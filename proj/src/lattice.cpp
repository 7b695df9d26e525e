#include "ulf/lattice.hpp"

#include <cmath>
#include <sstream>

#include "ulf/kernels_core.hpp"
#include "ulf/parallel.hpp"
#include "ulf/spectral.hpp"

namespace ulf {

VectorField leray_project(const VectorField& v) {
    if (!all_finite(v)) throw ValidationError("leray_project: non-finite input");
    SpectralVec s = to_spectral(v);
    leray_project_spec(s);
    return to_real(s);
}

DataKind data_kind_from_string(const std::string& s) {
    if (s == "compact_bump") return DataKind::CompactBump;
    if (s == "constant") return DataKind::Constant;
    if (s == "slow_oscillation_shear") return DataKind::SlowOscillationShear;
    if (s == "mixed") return DataKind::Mixed;
    throw ValidationError("data: unknown kind '" + s + "'");
}

std::string to_string(DataKind k) {
    switch (k) {
        case DataKind::CompactBump: return "compact_bump";
        case DataKind::Constant: return "constant";
        case DataKind::SlowOscillationShear: return "slow_oscillation_shear";
        case DataKind::Mixed: return "mixed";
    }
    return "?";
}

namespace {

// Smooth compactly supported profile exp(1 - 1/(1-s^2)); C^infty contact at
// the support edge keeps the spectral divergence of the sampled curl at
// roundoff level.
double cinf_bump(double s) {
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double cinf_bump_d(double s) {
    if (s >= 1.0) return 0.0;
    const double u = 1.0 - s * s;
    return cinf_bump(s) * (-2.0 * s / (u * u));
}

// w0 = curl(psi e3) = (d2 psi, -d1 psi, 0) with psi = amp * profile(|x|/r0).
VectorField compact_curl_bump(const Grid& g, double amp, double r0) {
    return sample_vector(g, [&](const Vec3& x) -> Vec3 {
        const Vec3 d = g.min_image(x, {0.0, 0.0, 0.0});
        const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        if (r >= r0 || r == 0.0) return {0.0, 0.0, 0.0};
        const double dpsi_dr = amp * cinf_bump_d(r / r0) / r0;
        return {dpsi_dr * d[1] / r, -dpsi_dr * d[0] / r, 0.0};
    });
}

double shear_phase(double s, double c_g) { return c_g * std::sqrt(std::log(2.0 + s * s)); }

// u0 = (a sin(g(x2)), 0, 0); g even, so the field is continuous across the
// periodic seam, and g' -> 0 makes the discrete oscillation functional
// decrease toward the box boundary.
VectorField slow_shear(const Grid& g, double amp, double c_g) {
    return sample_vector(g, [&](const Vec3& x) -> Vec3 {
        return {amp * std::sin(shear_phase(x[1], c_g)), 0.0, 0.0};
    });
}

double unit_ball_l3(const VectorField& u, const Grid& g, const Vec3& x0) {
    const auto& st = g.ball_stencil(1.0);
    const int cx = g.wrap_node(x0[0]);
    const int cy = g.wrap_node(x0[1]);
    const int cz = g.wrap_node(x0[2]);
    const int n = g.n();
    double acc = 0.0;
    for (const auto& d : st) {
        const int ix = ((cx + d[0]) % n + n) % n;
        const int iy = ((cy + d[1]) % n + n) % n;
        const int iz = ((cz + d[2]) % n + n) % n;
        const double m = u.magnitude(g.index(ix, iy, iz));
        acc += m * m * m;
    }
    const double h = g.spacing();
    return std::cbrt(acc * h * h * h);
}

}  // namespace

InitialData gen_initial_data(DataKind kind, const DataParams& params, const Grid& g) {
    const double L = g.half_length();
    InitialData out;
    out.w0 = VectorField(g);
    out.u0 = VectorField(g);

    switch (kind) {
        case DataKind::Constant: {
            out.u0 = sample_vector(g, [&](const Vec3&) { return params.constant; });
            break;
        }
        case DataKind::CompactBump: {
            const double r0 = params.bump_radius > 0.0 ? params.bump_radius : L / 6.0;
            if (1.5 * r0 > L / 4.0 + 1e-12 && r0 > L / 4.0)
                throw ValidationError("data: bump support exceeds L/4");
            out.w0 = leray_project(compact_curl_bump(g, params.amp_bump, r0));
            break;
        }
        case DataKind::SlowOscillationShear: {
            out.u0 = slow_shear(g, params.amp_shear, params.c_g);
            break;
        }
        case DataKind::Mixed: {
            const double r0 = params.bump_radius > 0.0 ? params.bump_radius : L / 6.0;
            out.w0 = leray_project(compact_curl_bump(g, params.amp_bump, r0));
            out.u0 = slow_shear(g, params.amp_shear, params.c_g);
            break;
        }
    }

    // u0's unit-ball L^3 norm must respect the configured bound; probe the
    // center and one far point (shear norms are x2-translation invariant).
    const double b = std::max(unit_ball_l3(out.u0, g, {0, 0, 0}),
                              unit_ball_l3(out.u0, g, {0, L / 2, 0}));
    if (b > params.bound) {
        std::ostringstream err;
        err << "data: ||u0||_{L^3(B_1)}=" << b << " exceeds bound " << params.bound;
        throw ValidationError(err.str());
    }

    out.v0 = out.w0 + out.u0;
    return out;
}

VectorField nondecaying_oscillation_control(const Grid& g, double amplitude, int mode) {
    const double k = g.k_fundamental() * 2.0 * mode;
    return sample_vector(g, [&](const Vec3& x) -> Vec3 {
        return {amplitude * std::sin(k * x[1]), 0.0, 0.0};
    });
}

namespace {

// Half-open cell convention [x0-r, x0+r) per axis: grid-aligned cubes get
// their volume exactly, general ones are O(h).
std::vector<std::array<int, 3>> cube_stencil(const Grid& g, double r) {
    std::vector<std::array<int, 3>> st;
    const double u = r / g.spacing();
    const int lo = static_cast<int>(std::ceil(-u - 1e-12));
    const int hi = static_cast<int>(std::ceil(u - 1e-12)) - 1;
    for (int di = lo; di <= hi; ++di)
        for (int dj = lo; dj <= hi; ++dj)
            for (int dk = lo; dk <= hi; ++dk) st.push_back({di, dj, dk});
    return st;
}

}  // namespace

double oscillation(const VectorField& v, const Vec3& x0, double r, Region region) {
    const Grid& g = v.grid();
    for (int c = 0; c < 3; ++c)
        if (std::abs(x0[c]) + r > g.half_length() + 1e-12)
            throw ValidationError("oscillation: region exits the box");

    const auto& st = (region == Region::Ball) ? g.ball_stencil(r) : cube_stencil(g, r);
    const int cx = g.wrap_node(x0[0]);
    const int cy = g.wrap_node(x0[1]);
    const int cz = g.wrap_node(x0[2]);
    const int n = g.n();

    std::array<double, 3> mean = {0.0, 0.0, 0.0};
    for (const auto& d : st) {
        const int ix = ((cx + d[0]) % n + n) % n;
        const int iy = ((cy + d[1]) % n + n) % n;
        const int iz = ((cz + d[2]) % n + n) % n;
        const std::int64_t idx = g.index(ix, iy, iz);
        for (int c = 0; c < 3; ++c) mean[static_cast<std::size_t>(c)] += v.value(c, idx);
    }
    for (auto& m : mean) m /= static_cast<double>(st.size());

    double acc = 0.0;
    for (const auto& d : st) {
        const int ix = ((cx + d[0]) % n + n) % n;
        const int iy = ((cy + d[1]) % n + n) % n;
        const int iz = ((cz + d[2]) % n + n) % n;
        const std::int64_t idx = g.index(ix, iy, iz);
        const double d0 = v.value(0, idx) - mean[0];
        const double d1 = v.value(1, idx) - mean[1];
        const double d2 = v.value(2, idx) - mean[2];
        acc += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
    }
    const double h = g.spacing();
    return acc * h * h * h;
}

OscillationEquivalenceReport cube_ball_oscillation_equivalence(const VectorField& v,
                                                               const std::vector<Vec3>& centers) {
    OscillationEquivalenceReport rep{};
    rep.c_ball_le_cube = 0.0;
    rep.c_cube_le_ball = 0.0;
    const double rho = 1.0 / std::sqrt(3.0);
    for (const auto& c : centers) {
        OscillationRow row{};
        row.center = c;
        row.ball_r1 = oscillation(v, c, 1.0, Region::Ball);
        row.cube_r1 = oscillation(v, c, 1.0, Region::Cube);
        row.cube_r_inv_sqrt3 = oscillation(v, c, rho, Region::Cube);
        if (row.cube_r1 > 0.0) rep.c_ball_le_cube = std::max(rep.c_ball_le_cube, row.ball_r1 / row.cube_r1);
        if (row.ball_r1 > 0.0)
            rep.c_cube_le_ball = std::max(rep.c_cube_le_ball, row.cube_r_inv_sqrt3 / row.ball_r1);
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<Vec3> probe_ladder(double from, double to, double step) {
    std::vector<Vec3> probes;
    for (double s = from; s <= to + 1e-9; s += step) probes.push_back({0.0, s, 0.0});
    return probes;
}

}  // namespace ulf
