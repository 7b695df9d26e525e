/// @file test_norms.cpp
/// @brief Uniformly-local and U^{s,p} norms against brute-force and
///        closed-form oracles; mollifier properties; the Example 2.1
///        counterexample.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ulf/kernels.hpp"
#include "ulf/lattice.hpp"
#include "ulf/norms.hpp"
#include "ulf/solver.hpp"
#include "ulf/spectral.hpp"

using namespace ulf;

namespace {

ScalarField gaussian_bump(const Grid& g, const Vec3& c, double sigma, double amp) {
    return sample_scalar(g, [&](const Vec3& x) {
        const Vec3 z = g.min_image(x, c);
        return amp * std::exp(-(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / (2 * sigma * sigma));
    });
}

}  // namespace

TEST_CASE("lq_uloc of a constant field matches |c| |B_1|^{1/q}") {
    const Grid g = Grid::make(64, 8.0);
    const VectorField c = sample_vector(g, [](const Vec3&) -> Vec3 { return {2, 0, 0}; });
    const NormReport r = lq_uloc(c, 2.0);
    CHECK(r.value == doctest::Approx(2.0 * std::sqrt(4.0 * M_PI / 3.0)).epsilon(0.03));
    // and exactly the discrete ball measure
    CHECK(r.value == doctest::Approx(2.0 * std::sqrt(g.ball_volume(1.0))).epsilon(1e-12));
    CHECK(lq_uloc(VectorField(g), 2.0).value == 0.0);
}

TEST_CASE("lq_uloc stride-1/2 sup matches the fine-stride oracle within 2%") {
    const Grid g = Grid::make(64, 8.0);
    const ScalarField f = gaussian_bump(g, {0.63, -1.7, 2.2}, 1.6, 1.3);
    const double coarse = lq_uloc(f, 2.0, 0.5).value;
    const double fine = lq_uloc(f, 2.0, 0.0).value;  // every node
    CHECK(coarse <= fine * (1.0 + 1e-12));
    CHECK(coarse >= fine * 0.98);
}

TEST_CASE("lq_uloc is monotone in q on the unit-volume-normalized scale") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const ScalarField f = gaussian_bump(g, {0.1, 0.2, -0.4}, 0.9, 1.0);
    const double vol = g.ball_volume(1.0);
    double prev = 0.0;
    for (double q : {1.0, 2.0, 3.0, 6.0}) {
        const double val = lq_uloc(f, q).value / std::pow(vol, 1.0 / q);
        CHECK(val >= prev * (1.0 - 1e-12));
        prev = val;
    }
}

TEST_CASE("lq_uloc triangle inequality on random pairs") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    for (int k = 0; k < 3; ++k) {
        const ScalarField f = gaussian_bump(g, {0.3 * k, -0.5, 0.0}, 0.7 + 0.1 * k, 1.0);
        const ScalarField h = gaussian_bump(g, {-0.8, 0.4 * k, 0.3}, 1.1, -0.7);
        ScalarField sum(g);
        for (std::int64_t i = 0; i < g.num_nodes(); ++i) sum[i] = f[i] + h[i];
        for (double q : {1.0, 2.0, 3.0})
            CHECK(lq_uloc(sum, q).value <=
                  (lq_uloc(f, q).value + lq_uloc(h, q).value) * (1.0 + 1e-12));
    }
}

TEST_CASE("usp_norm: zero and time-constant separability") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    Trajectory traj(g);
    std::vector<double> times = {0.0, 0.1, 0.2, 0.3, 0.4};
    const VectorField f = sample_vector(g, [&](const Vec3& x) -> Vec3 {
        return {std::sin(g.k_fundamental() * 2 * x[1]), 0, 0};
    });
    Trajectory zero(g);
    for (double t : times) {
        traj.push_back(t, f);
        zero.push_back(t, VectorField(g));
    }
    CHECK(usp_norm(zero, 2.0, 2.0, 0.0, 0.4).value == 0.0);

    // time-constant: usp = (t1-t0)^{1/s} * ball norm at the same witness
    for (double s : {1.0, 2.0, 4.0}) {
        const double usp = usp_norm(traj, s, 2.0, 0.0, 0.4).value;
        const double sep = std::pow(0.4, 1.0 / s) * lq_uloc(f, 2.0).value;
        CHECK(usp == doctest::Approx(sep).epsilon(1e-12));
    }
}

TEST_CASE("Eq (2.1) shape: usp <= L^s(t;L^p_uloc) on trajectories") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const VectorField f = sample_vector(g, [&](const Vec3& x) -> Vec3 {
        const Vec3 z = g.min_image(x, {0.4, 0, 0});
        const double b = std::exp(-(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]));
        return {b, -0.5 * b, 0.25 * b};
    });
    std::vector<double> times;
    for (int m = 0; m <= 6; ++m) times.push_back(0.05 * m);
    const Trajectory traj = heat_trajectory(f, times);
    for (auto [s, p] : std::vector<std::pair<double, double>>{{2.0, 2.0}, {3.0, 3.0}}) {
        const double usp = usp_norm(traj, s, p, 0.0, times.back()).value;
        // oracle: trapezoid of lq_uloc(t)^s
        double integral = 0.0;
        for (std::size_t m = 0; m + 1 < times.size(); ++m) {
            const double a = std::pow(lq_uloc(traj.snapshot(m), p).value, s);
            const double b = std::pow(lq_uloc(traj.snapshot(m + 1), p).value, s);
            integral += 0.5 * (times[m + 1] - times[m]) * (a + b);
        }
        CHECK(usp <= std::pow(integral, 1.0 / s) * (1.0 + 1e-9));
    }
}

TEST_CASE("energy_norm of a single-mode heat flow matches the closed-form decay") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const double k = 2.0 * g.k_fundamental();
    const double a = 0.7;
    const VectorField v0 =
        sample_vector(g, [&](const Vec3& x) -> Vec3 { return {a * std::sin(k * x[1]), 0, 0}; });
    std::vector<double> times;
    for (int m = 0; m <= 8; ++m) times.push_back(0.05 * m);
    const Trajectory traj = heat_trajectory(v0, times);
    const NormReport r = energy_norm(traj, 0.0, times.back());

    // closed forms: v(t) = e^{-k^2 t} v0, grad v(t) = e^{-k^2 t} grad v0
    CHECK(r.summand_a == doctest::Approx(lq_uloc(v0, 2.0).value).epsilon(1e-9));
    const ScalarField gmag = sample_scalar(
        g, [&](const Vec3& x) { return std::abs(a * k * std::cos(k * x[1])); });
    const auto w = trapezoid_weights(times, 0, times.size() - 1);
    double tfac = 0.0;
    for (std::size_t m = 0; m < times.size(); ++m)
        tfac += w[m] * std::exp(-2.0 * k * k * times[m]);
    const double expect_b = lq_uloc(gmag, 2.0).value * std::sqrt(tfac);
    CHECK(r.summand_b == doctest::Approx(expect_b).epsilon(1e-9));
}

TEST_CASE("solver output energy norm is controlled by the datum (Theorem 3.2 shape)") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const double k0 = g.k_fundamental();
    VectorField v0 = leray_project(sample_vector(g, [&](const Vec3& x) -> Vec3 {
        return {0.3 * std::sin(2 * k0 * x[1]), 0.3 * std::cos(2 * k0 * x[2]), 0};
    }));
    MildSolveConfig mc;
    mc.eps = 0.5;
    const double B = lq_uloc(v0, 2.0).value;
    const double window = std::min(1.0, mc.c_picard * std::pow(mc.eps, 3.0) / (B * B));
    mc.dt = window / 16.0;
    mc.T = 16 * mc.dt;
    const Trajectory traj = picard_mild_solve(v0, mc, nullptr);
    const double E = energy_norm(traj, 0.0, mc.T).value;
    CHECK(E > 0.0);
    CHECK(E <= 5.0 * B);
}

TEST_CASE("tail_profile verdicts") {
    const Grid g = Grid::make(64, 8.0);
    const std::vector<double> R_list = {1.0, 2.0, 3.0, 4.0};

    SUBCASE("compact support: profile hits exactly zero beyond support + 1") {
        ScalarField f = sample_scalar(g, [&](const Vec3& x) {
            const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            return r < 1.0 ? 1.0 - r : 0.0;
        });
        const TailProfile prof = tail_profile(f, 2.0, R_list);
        CHECK(prof.points.back().value == 0.0);
        CHECK(prof.monotone);
        CHECK(prof.decayed);
    }

    SUBCASE("constant: flat profile, not E^p") {
        const ScalarField c = sample_scalar(g, [](const Vec3&) { return 1.5; });
        const TailProfile prof = tail_profile(c, 2.0, R_list);
        CHECK(prof.points.front().value ==
              doctest::Approx(1.5 * std::sqrt(g.ball_volume(1.0))).epsilon(1e-12));
        CHECK(prof.points.back().value == doctest::Approx(prof.points.front().value).epsilon(1e-12));
        CHECK(!prof.decayed);
    }

    SUBCASE("mixed data: w0 decays, u0 does not") {
        DataParams p;
        p.amp_bump = 0.2;
        p.amp_shear = 0.2;
        p.c_g = 0.5;
        const InitialData d = gen_initial_data(DataKind::Mixed, p, g);
        const TailProfile pw = tail_profile(d.w0, 2.0, R_list, 0.05);
        // the Leray projection leaves stretched-exponential tails on the
        // discrete E^2 surrogate; they sit below 2% of the head value
        CHECK(pw.points.back().value <= 2e-2 * pw.points.front().value + 1e-14);
        CHECK(pw.decayed);
        const TailProfile pu = tail_profile(d.u0, 2.0, R_list);
        CHECK(pu.points.back().value > 0.5 * pu.points.front().value);
    }
}

TEST_CASE("mollify: exactness, symbol route vs direct convolution, sup bound") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const double eps = 0.75;

    SUBCASE("constants unchanged") {
        const ScalarField c = sample_scalar(g, [](const Vec3&) { return 3.0; });
        const ScalarField m = mollify(c, eps);
        double err = 0.0;
        for (std::int64_t i = 0; i < g.num_nodes(); ++i) err = std::max(err, std::abs(m[i] - 3.0));
        CHECK(err <= 1e-12);
    }

    SUBCASE("spectral route equals the direct real-space convolution") {
        const ScalarField f = sample_scalar(g, [&](const Vec3& x) {
            return std::sin(2 * g.k_fundamental() * x[0]) + 0.5 * std::cos(4 * g.k_fundamental() * x[2]);
        });
        const Mollifier moll = Mollifier::make(g, eps);
        const ScalarField a = moll.apply(f);
        const ScalarField b = moll.apply_direct(f);
        double err = 0.0;
        for (std::int64_t i = 0; i < g.num_nodes(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
        CHECK(err <= 1e-12);
        // single mode: multiplied by the symbol value at that mode
        CHECK(max_abs(a) <= max_abs(f) * (1.0 + 1e-12));
    }

    SUBCASE("second-order accuracy under eps halving") {
        const ScalarField f = sample_scalar(g, [&](const Vec3& x) {
            return std::sin(g.k_fundamental() * x[0]) * std::cos(g.k_fundamental() * x[1]);
        });
        auto err_at = [&](double e) {
            const ScalarField m = mollify(f, e);
            double err = 0.0;
            for (std::int64_t i = 0; i < g.num_nodes(); ++i)
                err = std::max(err, std::abs(m[i] - f[i]));
            return err;
        };
        const double e1 = err_at(1.6);
        const double e2 = err_at(0.8);
        CHECK(e1 / e2 >= 3.0);
        CHECK(e1 / e2 <= 5.0);
    }

    SUBCASE("unresolvable eps rejected") {
        CHECK_THROWS_AS(mollify(ScalarField(g), 1.9 * g.spacing()), ValidationError);
    }
}

TEST_CASE("partition of unity bump(x/R) + chi_R(x) = 1 exactly at nodes") {
    const Grid g = Grid::make_unchecked(32, 4.0);
    const ScalarField a = bump_field(g, {0, 0, 0}, 2.0);
    const ScalarField b = chi_field(g, 2.0);
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) CHECK(a[i] + b[i] == 1.0);
}

TEST_CASE("Example 2.1 counterexample: U^{s,p} finite, L^s L^p_uloc diverges") {
    const Grid g = Grid::make(64, 8.0);

    SUBCASE("K=1: both norms agree on a single ball") {
        const auto r = usp_counterexample(g, 2.0, 2.0, 0.0, 1.0, 1);
        CHECK(r.usp_value == doctest::Approx(std::sqrt(r.c_p_discrete)).epsilon(1e-9));
    }

    SUBCASE("K=8, s=2, p=2: partial sums grow by c_p/2 per term") {
        const auto r = usp_counterexample(g, 2.0, 2.0, 0.0, 1.0, 8);
        REQUIRE(r.increments.size() == 7);
        for (std::size_t k = 0; k < r.increments.size(); ++k) {
            CHECK(r.increments[k] == doctest::Approx(r.c_p_discrete / 2.0).epsilon(1e-9));
            CHECK(r.partial_sums[k] ==
                  doctest::Approx((k + 1) * r.c_p_discrete / 2.0).epsilon(1e-9));
        }
        // c_p is the discrete unit-ball measure, close to |B_1|
        CHECK(r.c_p_discrete == doctest::Approx(4.0 * M_PI / 3.0).epsilon(0.05));
    }

    SUBCASE("usp value independent of K") {
        const auto r4 = usp_counterexample(g, 2.0, 2.0, 0.0, 1.0, 4);
        const auto r8 = usp_counterexample(g, 2.0, 2.0, 0.0, 1.0, 8);
        CHECK(r4.usp_value == doctest::Approx(r8.usp_value).epsilon(0.01));
    }

    SUBCASE("too many balls rejected") {
        CHECK_THROWS_AS(usp_counterexample(g, 2.0, 2.0, 0.0, 1.0, 1000), ValidationError);
    }
}
