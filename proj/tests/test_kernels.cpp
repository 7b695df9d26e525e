/// @file test_kernels.cpp
/// @brief Heat/Oseen/Duhamel operators against closed forms and the direct
///        kernel quadratures; pointwise decay and uloc envelope checks;
///        the principal-value Riesz convolution.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ulf/kernels.hpp"
#include "ulf/runner.hpp"
#include "ulf/spectral.hpp"

using namespace ulf;

TEST_CASE("heat_apply: constants, eigenmodes, Gaussian variance oracle") {
    const Grid g = Grid::make(64, 8.0);

    const ScalarField c = sample_scalar(g, [](const Vec3&) { return 2.5; });
    const ScalarField hc = heat_apply(c, 0.7);
    double cerr = 0.0;
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) cerr = std::max(cerr, std::abs(hc[i] - 2.5));
    CHECK(cerr <= 1e-12);

    const double k = 2.0 * g.k_fundamental();
    const ScalarField mode = sample_scalar(g, [&](const Vec3& x) { return std::sin(k * x[0]); });
    const ScalarField hm = heat_apply(mode, 0.3);
    const double fac = std::exp(-k * k * 0.3);
    double merr = 0.0;
    for (std::int64_t i = 0; i < g.num_nodes(); ++i)
        merr = std::max(merr, std::abs(hm[i] - fac * mode[i]));
    CHECK(merr <= 1e-12);

    // Gaussian blob of variance sigma^2 -> variance sigma^2 + 2t, pointwise
    const double sig2 = 0.45 * 0.45;
    const double t = 0.3;
    const ScalarField f = sample_scalar(g, [&](const Vec3& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * sig2));
    });
    const ScalarField ht = heat_apply(f, t);
    const double s2t = sig2 + 2 * t;
    const double amp = std::pow(sig2 / s2t, 1.5);
    double gerr = 0.0;
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
        const Vec3 x = g.node(i);
        const double exact =
            amp * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * s2t));
        gerr = std::max(gerr, std::abs(ht[i] - exact));
    }
    CHECK(gerr <= 1e-8);

    CHECK_THROWS_AS(heat_apply(f, -0.1), ValidationError);
}

TEST_CASE("heat semigroup, mass conservation, commutation with the projection") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const VectorField f = sample_vector(g, [&](const Vec3& x) -> Vec3 {
        const double b = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 1.5);
        return {b, 0.4 * b, -b};
    });
    const VectorField a = heat_apply(heat_apply(f, 0.07), 0.13);
    const VectorField b = heat_apply(f, 0.2);
    double serr = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < g.num_nodes(); ++i)
            serr = std::max(serr, std::abs(a.value(c, i) - b.value(c, i)));
    CHECK(serr <= 1e-10 * max_abs(f));

    // node mean preserved exactly (k = 0 mode untouched)
    double m0 = 0.0, m1 = 0.0;
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
        m0 += f.value(0, i);
        m1 += b.value(0, i);
    }
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-13));

    const VectorField pa = leray_project(heat_apply(f, 0.2));
    const VectorField ap = heat_apply(leray_project(f), 0.2);
    double cerr = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < g.num_nodes(); ++i)
            cerr = std::max(cerr, std::abs(pa.value(c, i) - ap.value(c, i)));
    CHECK(cerr <= 1e-12 * max_abs(f));
}

TEST_CASE("oseen_apply: trivial inputs and the direct kernel quadrature") {
    const Grid g = Grid::make(64, 8.0);

    CHECK(max_abs(oseen_apply(TensorField(g), 0.5)) == 0.0);
    CHECK_THROWS_AS(oseen_apply(TensorField(g), 0.0), ValidationError);

    TensorField cid(g);
    for (int i = 0; i < 3; ++i)
        for (std::int64_t k = 0; k < g.num_nodes(); ++k)
            cid.comp(i, i)[static_cast<std::size_t>(k)] = 2.0;
    CHECK(max_abs(oseen_apply(cid, 0.5)) <= 1e-13);

    // smooth compact bump tensor: spectral vs direct quadrature, interior
    TensorField F(g);
    for (int c = 0; c < 9; ++c) {
        const double amp = (c % 4 == 0) ? 1.0 : 0.5;
        for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
            const Vec3 x = g.node(i);
            F.comp(c)[static_cast<std::size_t>(i)] =
                amp * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * 0.8 * 0.8));
        }
    }
    const double t = 0.25;
    const VectorField os = oseen_apply(F, t);
    const int n = g.n();
    const std::vector<std::array<int, 3>> probes = {
        {n / 2, n / 2, n / 2}, {n / 2 + 4, n / 2, n / 2}, {n / 2, n / 2 + 6, n / 2 + 2}};
    for (int comp = 0; comp < 2; ++comp) {
        const auto direct = oseen_apply_direct(F, t, probes, comp);
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const auto& p = probes[i];
            const double sv = os.comp(comp)[static_cast<std::size_t>(g.index(p[0], p[1], p[2]))];
            CHECK(std::abs(sv - direct[i]) <= 1e-3 * max_abs(os));
        }
    }
}

TEST_CASE("duhamel: closed-form mode integral and self-convergence order") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const double k = 2.0 * g.k_fundamental();

    SUBCASE("zero source") {
        std::vector<TensorField> F(3, TensorField(g));
        CHECK(max_abs(duhamel(F, {0.0, 0.05, 0.1}, 0.1)) == 0.0);
    }

    SUBCASE("time-constant single-mode tensor") {
        TensorField F(g);
        for (std::int64_t i = 0; i < g.num_nodes(); ++i)
            F.comp(0, 1)[static_cast<std::size_t>(i)] = std::sin(k * g.node(i)[0]);
        const double t = 0.2;
        std::vector<TensorField> traj;
        std::vector<double> times;
        for (int m = 0; m <= 64; ++m) {
            traj.push_back(F);
            times.push_back(t * m / 64.0);
        }
        const VectorField got = duhamel(traj, times, t);
        // oracle: (1 - e^{-|k|^2 t})/|k|^2 P (ik . F) on the single mode
        SpectralVec G = divergence_spec(F);
        leray_project_spec(G);
        for (auto& c : G.comp)
            for (auto& z : c) z *= (1.0 - std::exp(-k * k * t)) / (k * k);
        const VectorField want = to_real(G);
        double err = 0.0;
        for (int c = 0; c < 3; ++c)
            for (std::int64_t i = 0; i < g.num_nodes(); ++i)
                err = std::max(err, std::abs(got.value(c, i) - want.value(c, i)));
        CHECK(err <= 2e-5 * max_abs(want));
    }

    SUBCASE("Richardson self-convergence order >= 1.8") {
        auto source = [&](double t) {
            TensorField F(g, t);
            for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
                const Vec3 x = g.node(i);
                F.comp(1, 2)[static_cast<std::size_t>(i)] =
                    (1.0 + t + 3.0 * t * t) * std::sin(k * x[1]) * std::cos(k * x[2]);
                F.comp(0, 0)[static_cast<std::size_t>(i)] = t * std::cos(k * x[0]);
            }
            return F;
        };
        auto run = [&](int M) {
            std::vector<TensorField> traj;
            std::vector<double> times;
            for (int m = 0; m <= M; ++m) {
                const double t = 0.2 * m / M;
                traj.push_back(source(t));
                times.push_back(t);
            }
            return duhamel(traj, times, 0.2);
        };
        const VectorField a = run(8), b = run(16), ref = run(64);
        double ea = 0.0, eb = 0.0;
        for (int c = 0; c < 3; ++c)
            for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
                ea = std::max(ea, std::abs(a.value(c, i) - ref.value(c, i)));
                eb = std::max(eb, std::abs(b.value(c, i) - ref.value(c, i)));
            }
        CHECK(std::log2(ea / eb) >= 1.8);
    }
}

TEST_CASE("pointwise Oseen decay exponents (Eq 2.2 shape)") {
    const Grid g = Grid::make(64, 8.0);
    for (auto [k, l, target] : std::vector<std::array<int, 3>>{{0, 0, -3}, {0, 1, -4}, {1, 0, -5}}) {
        const auto rep = oseen_bound_check(g, k, l);
        CHECK(rep.fitted_C > 0.0);
        CHECK(std::abs(rep.slope - target) <= 0.15);
    }
    // plug-in scaling of the bound at |x| ~ 0: t -> 4t scales it by 2^{-3-l-2k}
    for (auto [k, l] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}}) {
        const double e = -3.0 - l - 2 * k;
        const double b1 = std::pow(std::sqrt(0.1), e);
        const double b4 = std::pow(std::sqrt(0.4), e);
        CHECK(b4 / b1 == doctest::Approx(std::pow(2.0, e)).epsilon(1e-12));
    }
}

TEST_CASE("heat uloc envelopes (Lemma 2.2 shape)") {
    const Grid g = Grid::make(64, 8.0);
    const VectorField c = sample_vector(g, [](const Vec3&) -> Vec3 { return {1, 0, 0}; });
    const auto rc = heat_uloc_bound_check(c, 2.0, 2.0, {0.01, 0.1, 1.0});
    // constants are heat-invariant: the q = p ratio is constant in t
    double rmin = kInf, rmax = 0.0;
    for (const auto& s : rc.samples) {
        rmin = std::min(rmin, s.measured / s.bound);
        rmax = std::max(rmax, s.measured / s.bound);
    }
    CHECK(rmax / rmin <= 1.0 + 1e-10);

    const VectorField f = sample_vector(g, [&](const Vec3& x) -> Vec3 {
        const double b = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 0.72);
        return {b, -0.5 * b, 0.0};
    });
    const auto r = heat_uloc_bound_check(f, 2.0, kInf, {0.01, 0.04, 0.16, 0.64});
    CHECK(r.fitted_C > 0.0);
    CHECK(r.fitted_C < 5.0);

    TensorField F(g);
    for (int c2 = 0; c2 < 9; ++c2) F.comp(c2) = f.comp(c2 % 3);
    const auto r2 = oseen_uloc_bound_check(F, 2.0, 2.0, {0.01, 0.04, 0.16, 0.64});
    CHECK(r2.fitted_C > 0.0);
    CHECK(r2.fitted_C < 5.0);
}

TEST_CASE("riesz_pv_convolve: constants and the ball-potential oracle") {
    const Grid g = Grid::make(64, 8.0);
    const Vec3 x0 = {0.5, 0.0, -0.5};

    SUBCASE("zero source") {
        const LocalBall r = riesz_pv_convolve(ScalarField(g), x0, 0, 0);
        for (double v : r.values) CHECK(v == 0.0);
    }

    SUBCASE("constant source: -(c/3) delta convention, zero off-diagonal") {
        const double c = 2.0;
        const ScalarField src = sample_scalar(g, [&](const Vec3&) { return c; });
        // diagonal components: the closed-form ball potential gives -c/3 at
        // every interior point; the pv sum part vanishes
        double diag_sum_err = 0.0, offdiag = 0.0;
        std::array<LocalBall, 3> diag = {riesz_pv_convolve(src, x0, 0, 0),
                                         riesz_pv_convolve(src, x0, 1, 1),
                                         riesz_pv_convolve(src, x0, 2, 2)};
        const LocalBall od = riesz_pv_convolve(src, x0, 0, 1);
        for (std::size_t e = 0; e < od.values.size(); ++e) {
            const double s = diag[0].values[e] + diag[1].values[e] + diag[2].values[e];
            diag_sum_err = std::max(diag_sum_err, std::abs(s - (-c)));
            offdiag = std::max(offdiag, std::abs(od.values[e]));
        }
        CHECK(diag_sum_err <= 0.04 * c);  // O(h) boundary quadrature
        CHECK(offdiag <= 0.04 * c);
        // at the center the shells are complete: much tighter
        std::size_t center = 0;
        const auto& offs = *diag[0].offsets;
        for (std::size_t e = 0; e < offs.size(); ++e)
            if (offs[e][0] == 0 && offs[e][1] == 0 && offs[e][2] == 0) center = e;
        CHECK(diag[0].values[center] == doctest::Approx(-c / 3.0).epsilon(5e-3));
    }

    SUBCASE("smooth compact source vs the spectral second-derivative oracle") {
        const ScalarField src = sample_scalar(g, [&](const Vec3& x) {
            const Vec3 z = g.min_image(x, x0);
            const double r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
            return std::exp(-r2 / (2 * 0.6 * 0.6));
        });
        // spectral (-lap)^{-1} d_i d_j
        CplxVec spec = fft_scalar(src);
        CplxVec out(spec.size(), {0.0, 0.0});
        for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
            const double kk[3] = {g.deriv_wavenumber(ix), g.deriv_wavenumber(iy),
                                  g.deriv_wavenumber(kz)};
            const double k2 = kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2];
            if (k2 == 0.0) return;
            out[static_cast<std::size_t>(idx)] =
                (-kk[0] * kk[1] / k2) * spec[static_cast<std::size_t>(idx)];
        });
        const ScalarField oracle = ifft_scalar(g, out);

        const LocalBall got = riesz_pv_convolve(src, x0, 0, 1);
        const auto& offs = *got.offsets;
        double err = 0.0, scale = max_abs(oracle);
        const int n = g.n();
        for (std::size_t e = 0; e < offs.size(); ++e) {
            const auto& d = offs[e];
            const int ix = ((got.node[0] + d[0]) % n + n) % n;
            const int iy = ((got.node[1] + d[1]) % n + n) % n;
            const int iz = ((got.node[2] + d[2]) % n + n) % n;
            err = std::max(err, std::abs(got.values[e] - oracle[g.index(ix, iy, iz)]));
        }
        CHECK(err <= 1e-2 * scale);
    }
}

TEST_CASE("check-kernels consolidated suite passes, mutation fixture fails") {
    const CheckReport rep = check_kernels(64);
    for (const auto& row : rep.rows) {
        INFO(row.name, ": ", row.detail);
        CHECK(row.pass);
    }
    const CheckReport bad = detail::check_kernels_impl(Grid::make(64, 8.0), true);
    bool oseen_failed = false;
    for (const auto& row : bad.rows)
        if (!row.pass && row.name.rfind("oseen", 0) == 0) oseen_failed = true;
    CHECK(oseen_failed);
}

TEST_CASE("check-kernels tiny-grid override passes with wider budgets") {
    const CheckReport rep = check_kernels(16);
    for (const auto& row : rep.rows) {
        INFO(row.name, ": ", row.detail);
        CHECK(row.pass);
    }
}
