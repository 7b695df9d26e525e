#include "ulf/spectral.hpp"

#include <cmath>

#include "ulf/kernels_core.hpp"
#include "ulf/parallel.hpp"

namespace ulf {

CplxVec fft_scalar(const ScalarField& f) {
    CplxVec out;
    f.grid().fft().forward(f.data(), out);
    return out;
}

ScalarField ifft_scalar(const Grid& g, const CplxVec& spec, double time) {
    ScalarField out(g, time);
    g.fft().inverse(spec, out.data());
    return out;
}

SpectralVec to_spectral(const VectorField& v) {
    SpectralVec s{v.grid(), v.time(), {}};
    for (int c = 0; c < 3; ++c) v.grid().fft().forward(v.comp(c), s.comp[static_cast<std::size_t>(c)]);
    return s;
}

VectorField to_real(const SpectralVec& s) {
    VectorField v(s.grid, s.time);
    for (int c = 0; c < 3; ++c) s.grid.fft().inverse(s.comp[static_cast<std::size_t>(c)], v.comp(c));
    return v;
}

void for_each_mode(const Grid& g, const std::function<void(int, int, int, std::int64_t)>& fn) {
    const int n = g.n();
    const int nz = n / 2 + 1;
    parallel_for(n, [&](std::int64_t ix) {
        std::int64_t idx = ix * n * nz;
        for (int iy = 0; iy < n; ++iy)
            for (int kz = 0; kz < nz; ++kz, ++idx) fn(static_cast<int>(ix), iy, kz, idx);
    });
}

RealVec heat_symbol(const Grid& g, double t) {
    RealVec sym(static_cast<std::size_t>(g.fft().spec_size()));
    for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
        const double kx = g.wavenumber(ix);
        const double ky = g.wavenumber(iy);
        const double kzv = g.wavenumber(kz);
        sym[static_cast<std::size_t>(idx)] = std::exp(-(kx * kx + ky * ky + kzv * kzv) * t);
    });
    return sym;
}

void apply_symbol(SpectralVec& v, const RealVec& sym) {
    for (auto& c : v.comp) core::spectral_scale(c, c, sym);
}

void apply_symbol(CplxVec& spec, const RealVec& sym) { core::spectral_scale(spec, spec, sym); }

void leray_project_spec(SpectralVec& v) {
    const Grid& g = v.grid;
    for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
        const double kx = g.deriv_wavenumber(ix);
        const double ky = g.deriv_wavenumber(iy);
        const double kzv = g.deriv_wavenumber(kz);
        const double k2 = kx * kx + ky * ky + kzv * kzv;
        if (k2 == 0.0) return;
        const auto i = static_cast<std::size_t>(idx);
        const std::complex<double> kdotv =
            kx * v.comp[0][i] + ky * v.comp[1][i] + kzv * v.comp[2][i];
        const std::complex<double> s = kdotv / k2;
        v.comp[0][i] -= kx * s;
        v.comp[1][i] -= ky * s;
        v.comp[2][i] -= kzv * s;
    });
}

CplxVec derivative_spec(const Grid& g, const CplxVec& spec, int c) {
    CplxVec out(spec.size());
    for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
        const int comp_index[3] = {ix, iy, kz};
        const double k = g.deriv_wavenumber(comp_index[c]);
        const auto i = static_cast<std::size_t>(idx);
        out[i] = std::complex<double>(0.0, k) * spec[i];
    });
    return out;
}

TensorField gradient(const VectorField& v) {
    TensorField out(v.grid(), v.time());
    for (int j = 0; j < 3; ++j) {
        CplxVec spec;
        v.grid().fft().forward(v.comp(j), spec);
        for (int i = 0; i < 3; ++i) {
            CplxVec d = derivative_spec(v.grid(), spec, i);
            v.grid().fft().inverse(d, out.comp(i, j));
        }
    }
    return out;
}

VectorField gradient(const ScalarField& f) {
    VectorField out(f.grid(), f.time());
    CplxVec spec = fft_scalar(f);
    for (int i = 0; i < 3; ++i) {
        CplxVec d = derivative_spec(f.grid(), spec, i);
        f.grid().fft().inverse(d, out.comp(i));
    }
    return out;
}

ScalarField divergence(const VectorField& v) {
    const Grid& g = v.grid();
    CplxVec acc(static_cast<std::size_t>(g.fft().spec_size()), {0.0, 0.0});
    for (int c = 0; c < 3; ++c) {
        CplxVec spec;
        g.fft().forward(v.comp(c), spec);
        CplxVec d = derivative_spec(g, spec, c);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
    }
    return ifft_scalar(g, acc, v.time());
}

SpectralVec divergence_spec(const TensorField& F) {
    const Grid& g = F.grid();
    SpectralVec out{g, F.time(), {}};
    for (auto& c : out.comp) c.assign(static_cast<std::size_t>(g.fft().spec_size()), {0.0, 0.0});
    CplxVec spec;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            g.fft().forward(F.comp(j, i), spec);  // (div F)_i = d_j F_{ji}
            CplxVec d = derivative_spec(g, spec, j);
            auto& acc = out.comp[static_cast<std::size_t>(i)];
            for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += d[m];
        }
    return out;
}

ScalarField poisson_pressure(const TensorField& N) {
    const Grid& g = N.grid();
    CplxVec acc(static_cast<std::size_t>(g.fft().spec_size()), {0.0, 0.0});
    CplxVec spec;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            g.fft().forward(N.comp(i, j), spec);
            for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
                const double ki = g.deriv_wavenumber(i == 0 ? ix : (i == 1 ? iy : kz));
                const double kj = g.deriv_wavenumber(j == 0 ? ix : (j == 1 ? iy : kz));
                const double kx = g.deriv_wavenumber(ix);
                const double ky = g.deriv_wavenumber(iy);
                const double kzv = g.deriv_wavenumber(kz);
                const double k2 = kx * kx + ky * ky + kzv * kzv;
                const auto m = static_cast<std::size_t>(idx);
                if (k2 == 0.0) return;  // zero-mean convention
                acc[m] += (-ki * kj / k2) * spec[m];
            });
        }
    return ifft_scalar(g, acc, N.time());
}

double max_divergence(const VectorField& v) { return max_abs(divergence(v)); }

}  // namespace ulf
