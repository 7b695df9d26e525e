/// @file test_pressure.cpp
/// @brief Spectral pressure, the local decompositions phat/pcheck, the
///        explicit c_{x0} formula, the parasitic counterexample, and the
///        Lemma-4.1-style pointwise identity.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ulf/lattice.hpp"
#include "ulf/pressure.hpp"
#include "ulf/solver.hpp"
#include "ulf/spectral.hpp"

using namespace ulf;

namespace {

Trajectory constant_in_time(const Grid& g, const VectorField& v, const std::vector<double>& times) {
    Trajectory traj(g);
    for (double t : times) traj.push_back(t, v);
    return traj;
}

}  // namespace

TEST_CASE("pressure_spectral: trivial sources and the Fourier symbol") {
    const Grid g = Grid::make_unchecked(32, 4.0);

    CHECK(max_abs(pressure_spectral({TensorField(g)}).front()) == 0.0);

    TensorField cid(g);
    for (int i = 0; i < 3; ++i)
        for (auto& v : cid.comp(i, i)) v = 3.0;
    CHECK(max_abs(pressure_spectral({cid}).front()) <= 1e-13);

    // single mode: p_hat(k) = -k_i k_j Nhat_ij / |k|^2
    const double k = 2.0 * g.k_fundamental();
    TensorField N(g);
    for (std::int64_t i = 0; i < g.num_nodes(); ++i)
        N.comp(0, 1)[static_cast<std::size_t>(i)] = std::sin(k * g.node(i)[0]);
    const ScalarField p = pressure_spectral({N}).front();
    // -d_0 d_1 of sin(k x0) vanishes (no x1 dependence): expect zero
    // use instead N_00 = sin(k x0): -lap p = d00 N00 -> p = sin(k x0)... sign:
    TensorField N2(g);
    for (std::int64_t i = 0; i < g.num_nodes(); ++i)
        N2.comp(0, 0)[static_cast<std::size_t>(i)] = std::sin(k * g.node(i)[0]);
    const ScalarField p2 = pressure_spectral({N2}).front();
    double err = 0.0;
    for (std::int64_t i = 0; i < g.num_nodes(); ++i)
        err = std::max(err, std::abs(p2[i] - (-std::sin(k * g.node(i)[0]))));
    CHECK(max_abs(p) <= 1e-13);
    CHECK(err <= 1e-12);
}

TEST_CASE("pressure_spectral satisfies -lap p = didj Nij to 1e-10 relative") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const double k0 = g.k_fundamental();
    TensorField N(g);
    for (int c = 0; c < 9; ++c)
        for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
            const Vec3 x = g.node(i);
            N.comp(c)[static_cast<std::size_t>(i)] =
                std::sin(2 * k0 * x[c % 3]) * std::cos(2 * k0 * x[(c + 1) % 3]);
        }
    const ScalarField p = pressure_spectral({N}).front();

    // both sides assembled spectrally but independently
    CplxVec ps = fft_scalar(p);
    CplxVec lhs(ps.size()), rhs(ps.size(), {0.0, 0.0});
    for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
        const double kk[3] = {g.deriv_wavenumber(ix), g.deriv_wavenumber(iy),
                              g.deriv_wavenumber(kz)};
        const double k2 = kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2];
        lhs[static_cast<std::size_t>(idx)] = k2 * ps[static_cast<std::size_t>(idx)];
    });
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ScalarField comp(g);
            comp.data() = N.comp(i, j);
            CplxVec spec = fft_scalar(comp);
            for_each_mode(g, [&](int ix, int iy, int kz, std::int64_t idx) {
                const double kk[3] = {g.deriv_wavenumber(ix), g.deriv_wavenumber(iy),
                                      g.deriv_wavenumber(kz)};
                rhs[static_cast<std::size_t>(idx)] +=
                    -kk[i] * kk[j] * spec[static_cast<std::size_t>(idx)];
            });
        }
    // compare away from the zero mode (mean convention)
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 1; i < lhs.size(); ++i) {
        err = std::max(err, std::abs(lhs[i] - rhs[i]));
        scale = std::max(scale, std::abs(rhs[i]));
    }
    CHECK(err <= 1e-10 * scale);
}

TEST_CASE("phat_local of a constant field is spatially constant on the ball") {
    const Grid g = Grid::make(64, 8.0);
    const VectorField c = sample_vector(g, [](const Vec3&) -> Vec3 { return {0.8, -0.3, 0.2}; });
    const Trajectory traj = constant_in_time(g, c, {0.0, 0.1});
    const PressureReport rep = phat_local(traj, {0.5, 0, 0}, {0});
    double vmin = kInf, vmax = -kInf;
    for (double v : rep.local.front().values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    const double c2 = 0.8 * 0.8 + 0.3 * 0.3 + 0.2 * 0.2;
    CHECK(vmax - vmin <= 0.05 * c2);
}

TEST_CASE("decomposition_check: zero solution and the parasitic counterexample") {
    const Grid g = Grid::make(64, 8.0);
    std::vector<double> times = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};

    SUBCASE("zero fields pass with zero variance") {
        Trajectory z = constant_in_time(g, VectorField(g), times);
        std::vector<ScalarField> p(times.size(), ScalarField(g));
        const PressureReport rep = decomposition_check(p, z, {0, 0, 0}, 1e-2, {1, 3});
        CHECK(rep.pass);
        for (double v : rep.variance) CHECK(v == 0.0);
        for (double v : rep.c_series) CHECK(v == 0.0);
    }

    SUBCASE("parasitic pair fails, variance linear in |f'|") {
        auto parasitic = [&](const std::function<double(double)>& f,
                             const std::function<double(double)>& fprime) {
            Trajectory traj(g);
            std::vector<ScalarField> p;
            for (double t : times) {
                traj.push_back(t, sample_vector(g, [&](const Vec3&) -> Vec3 {
                                   return {f(t), 0, 0};
                               }));
                p.push_back(sample_scalar(g, [&](const Vec3& x) { return -fprime(t) * x[0]; }));
            }
            return decomposition_check(p, traj, {0, 0, 0}, 1e-2, {3, 5});
        };
        const auto quad = parasitic([](double t) { return t * t; }, [](double t) { return 2 * t; });
        CHECK(!quad.pass);
        // variance = |f'(t)| * spatial extent of x1 over the ball (about 3)
        CHECK(quad.variance[0] == doctest::Approx(2 * times[3] * 3.0).epsilon(0.02));
        CHECK(quad.variance[1] == doctest::Approx(2 * times[5] * 3.0).epsilon(0.02));

        const auto sine = parasitic([](double t) { return std::sin(t); },
                                    [](double t) { return std::cos(t); });
        // ratio of variances tracks the ratio of |f'|
        const double want = std::cos(times[3]) / (2 * times[3]);
        CHECK(sine.variance[0] / quad.variance[0] == doctest::Approx(want).epsilon(0.02));
    }
}

TEST_CASE("cx0_direct: zero data, n-independence, dual-route consistency") {
    const Grid g = Grid::make(64, 8.0);
    std::vector<double> times = {0.0, 0.01};

    SUBCASE("zero field gives a zero series") {
        Trajectory z = constant_in_time(g, VectorField(g), times);
        for (double v : cx0_direct(z, {0, 1, 0}, 3, {0})) CHECK(v == 0.0);
    }

    SUBCASE("n-independence is exact regrouping") {
        const VectorField v = sample_vector(g, [&](const Vec3& x) -> Vec3 {
            const Vec3 z = g.min_image(x, {0.3, -0.2, 0.5});
            const double b = std::exp(-(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / 2.0);
            return {0.5 * b + 0.2, -0.3 * b, 0.1};
        });
        Trajectory traj = constant_in_time(g, v, times);
        const auto a = cx0_direct(traj, {0, 1, 0}, 2, {0});
        const auto b = cx0_direct(traj, {0, 1, 0}, 3, {0});
        CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-10));
    }

    SUBCASE("constant field: dual route against ball averages") {
        const VectorField c = sample_vector(g, [](const Vec3&) -> Vec3 { return {0.7, 0.2, 0}; });
        Trajectory traj = constant_in_time(g, c, times);
        TensorField N(g);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double ci = (i == 0 ? 0.7 : (i == 1 ? 0.2 : 0.0));
                const double cj = (j == 0 ? 0.7 : (j == 1 ? 0.2 : 0.0));
                for (auto& x : N.comp(i, j)) x = ci * cj;
            }
        const auto p = pressure_spectral({N, N});
        const Vec3 x0 = {0, 1.5, 0};
        const auto direct = cx0_direct(traj, x0, 3, {0});
        const PressureReport at0 = decomposition_check(p, traj, {0, 0, 0}, 1e-2, {0});
        const PressureReport atx = decomposition_check(p, traj, x0, 1e-2, {0});
        const double avg_route = atx.c_series[0] - at0.c_series[0];
        CHECK(std::abs(direct[0] - avg_route) <= 2e-2);
    }
}

TEST_CASE("pcheck_local: collapse to phat when V = 0; tau validation") {
    const Grid g = Grid::make(64, 8.0);
    std::vector<double> times = {0.0, 0.01};
    const VectorField w = sample_vector(g, [&](const Vec3& x) -> Vec3 {
        const Vec3 z = g.min_image(x, {0, 0.5, 0});
        const double b = 0.4 * std::exp(-(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / 1.3);
        return {b, -0.5 * b, 0.2 * b};
    });
    Trajectory wt = constant_in_time(g, w, times);
    Trajectory V0 = constant_in_time(g, VectorField(g), times);
    std::vector<ScalarField> p(times.size(), ScalarField(g));

    const PressureReport pc = pcheck_local(wt, V0, p, {0, 1, 0}, 1e-2, std::nullopt, {0});
    const PressureReport ph = phat_local(wt, {0, 1, 0}, {0});
    REQUIRE(pc.local.front().values.size() == ph.local.front().values.size());
    double err = 0.0;
    for (std::size_t e = 0; e < pc.local.front().values.size(); ++e)
        err = std::max(err, std::abs(pc.local.front().values[e] - ph.local.front().values[e]));
    CHECK(err <= 1e-12);
    CHECK(std::abs(pc.qtilde.front()) == 0.0);
    CHECK(std::abs(pc.qhat.front()) == 0.0);

    CHECK_THROWS_AS(pcheck_local(wt, V0, p, {0, 1, 0}, 1e-2, 3.0, {0}), ValidationError);
    CHECK_THROWS_AS(pcheck_local(wt, V0, p, {0, 1, 0}, 1e-2, 5.0, {0}), ValidationError);
    // rho_tau support 1.5*5 = 7.5 plus |x0| = 1 exceeds L = 8
}

TEST_CASE("pointwise identity phat = pcheck + qtilde + qhat up to quadrature") {
    const Grid g = Grid::make(64, 8.0);
    DataParams dp;
    dp.amp_bump = 0.12;
    dp.amp_shear = 0.18;
    dp.c_g = 0.8;
    const InitialData data = gen_initial_data(DataKind::Mixed, dp, g);
    std::vector<double> times = {0.0, 0.02};
    const Trajectory V = heat_trajectory(data.u0, times);
    Trajectory w(g);
    for (double t : times) {
        w.push_back(t, heat_apply(data.w0, t));
    }
    const double gap = pressure_identity_gap(w, V, {0, 1, 0}, {1});
    CHECK(gap <= 5e-4);

    std::vector<ScalarField> p(times.size(), ScalarField(g));
    const PressureReport pc = pcheck_local(w, V, p, {0, 1, 0}, 1e-2, std::nullopt, {1});
    // |qtilde| + |qhat| within the U^{inf,2} envelope of V
    CHECK(pc.qsum_envelope < 1.0);
}

TEST_CASE("G-part tau re-split regroups exactly (larger box)") {
    const Grid g = Grid::make(128, 16.0);
    DataParams dp;
    dp.amp_shear = 0.2;
    dp.c_g = 0.8;
    const InitialData data = gen_initial_data(DataKind::SlowOscillationShear, dp, g);
    const Trajectory V = heat_trajectory(data.u0, {0.05});
    const GResplitReport rep = pcheck_g_resplit(V, {0, 0.5, 0}, 5.0, {0});
    CHECK(rep.regroup_gap <= 1e-10);
    CHECK(rep.g1_l32 >= 0.0);
    CHECK(rep.g3_l32 >= 0.0);
    CHECK_THROWS_AS(pcheck_g_resplit(V, {0, 0.5, 0}, 4.0, {0}), ValidationError);
    CHECK_THROWS_AS(pcheck_g_resplit(V, {0, 0.5, 0}, 12.0, {0}), ValidationError);
}
