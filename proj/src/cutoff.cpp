#include "ulf/cutoff.hpp"

#include <cmath>
#include <sstream>

#include "ulf/kernels_core.hpp"
#include "ulf/parallel.hpp"
#include "ulf/spectral.hpp"

namespace ulf {

namespace cutoff {

double step(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double step_d(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double u = s * (1.0 - s);
    return -30.0 * u * u;
}

double step_dd(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

double bump(double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 1.5) return 0.0;
    return step(2.0 * (r - 1.0));
}

double bump_d(double r) {
    if (r <= 1.0 || r >= 1.5) return 0.0;
    return 2.0 * step_d(2.0 * (r - 1.0));
}

double bump_dd(double r) {
    if (r <= 1.0 || r >= 1.5) return 0.0;
    return 4.0 * step_dd(2.0 * (r - 1.0));
}

double ramp(double s) { return 1.0 - step(s - 1.0); }
double ramp_d(double s) { return -step_d(s - 1.0); }

double eta(double r) {
    if (r >= 1.0) return 0.0;
    const double u = 1.0 - r * r;
    return 315.0 / (64.0 * M_PI) * u * u * u;
}

}  // namespace cutoff

Mollifier Mollifier::make(const Grid& g, double eps) {
    if (eps < 2.0 * g.spacing() - 1e-12) {
        std::ostringstream err;
        err << "mollifier: eps=" << eps << " < 2h=" << 2.0 * g.spacing() << " is unresolvable";
        throw ValidationError(err.str());
    }
    Mollifier m;
    m.grid_ = g;
    m.eps_ = eps;
    m.kernel_ = ScalarField(g);
    const double inv_e3 = 1.0 / (eps * eps * eps);
    double sum = 0.0;
    const auto& st = g.ball_stencil(eps);
    for (const auto& d : st) {
        const double r = g.spacing() * std::sqrt(double(d[0]) * d[0] + double(d[1]) * d[1] + double(d[2]) * d[2]);
        const double v = inv_e3 * cutoff::eta(r / eps);
        const int n = g.n();
        const int ix = ((d[0] % n) + n) % n;
        const int iy = ((d[1] % n) + n) % n;
        const int iz = ((d[2] % n) + n) % n;
        m.kernel_[g.index(ix, iy, iz)] += v;
        sum += v;
    }
    const double h3 = g.spacing() * g.spacing() * g.spacing();
    const double norm = 1.0 / (sum * h3);
    for (auto& v : m.kernel_.data()) v *= norm;

    CplxVec sym;
    g.fft().forward(m.kernel_.data(), sym);
    m.symbol_.resize(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) m.symbol_[i] = sym[i].real() * h3;
    return m;
}

ScalarField Mollifier::apply(const ScalarField& f) const {
    CplxVec spec = fft_scalar(f);
    core::spectral_scale(spec, spec, symbol_);
    return ifft_scalar(grid_, spec, f.time());
}

VectorField Mollifier::apply(const VectorField& f) const {
    VectorField out(grid_, f.time());
    for (int c = 0; c < 3; ++c) {
        CplxVec spec;
        grid_.fft().forward(f.comp(c), spec);
        core::spectral_scale(spec, spec, symbol_);
        grid_.fft().inverse(spec, out.comp(c));
    }
    return out;
}

ScalarField Mollifier::apply_direct(const ScalarField& f) const {
    ScalarField out(grid_, f.time());
    const Grid& g = grid_;
    const int n = g.n();
    const double h3 = g.spacing() * g.spacing() * g.spacing();
    const auto& st = g.ball_stencil(eps_);
    parallel_for(g.num_nodes(), [&](std::int64_t idx) {
        const int iz = static_cast<int>(idx % n);
        const int iy = static_cast<int>((idx / n) % n);
        const int ix = static_cast<int>(idx / (static_cast<std::int64_t>(n) * n));
        double acc = 0.0;
        for (const auto& d : st) {
            const int jx = ((ix - d[0]) % n + n) % n;
            const int jy = ((iy - d[1]) % n + n) % n;
            const int jz = ((iz - d[2]) % n + n) % n;
            const int kx = (d[0] % n + n) % n;
            const int ky = (d[1] % n + n) % n;
            const int kz = (d[2] % n + n) % n;
            acc += kernel_[g.index(kx, ky, kz)] * f[g.index(jx, jy, jz)];
        }
        out[idx] = acc * h3;
    });
    return out;
}

ScalarField phi_eps_field(const Grid& g, double eps) {
    return sample_scalar(g, [&](const Vec3& x) {
        const Vec3 d = g.min_image(x, {0.0, 0.0, 0.0});
        return cutoff::bump(eps * std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
    });
}

VectorField grad_phi_eps_field(const Grid& g, double eps) {
    return sample_vector(g, [&](const Vec3& x) -> Vec3 {
        const Vec3 d = g.min_image(x, {0.0, 0.0, 0.0});
        const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        if (r == 0.0) return {0.0, 0.0, 0.0};
        const double s = eps * cutoff::bump_d(eps * r) / r;
        return {s * d[0], s * d[1], s * d[2]};
    });
}

ScalarField chi_field(const Grid& g, double R) {
    return sample_scalar(g, [&](const Vec3& x) {
        const Vec3 d = g.min_image(x, {0.0, 0.0, 0.0});
        return cutoff::chi(std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]), R);
    });
}

ScalarField bump_field(const Grid& g, const Vec3& x0, double scale) {
    return sample_scalar(g, [&](const Vec3& x) {
        const Vec3 d = g.min_image(x, x0);
        return cutoff::bump(std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / scale);
    });
}

}  // namespace ulf
