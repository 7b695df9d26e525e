#include "ulf/testfunction.hpp"

#include <cmath>

#include "ulf/cutoff.hpp"

namespace ulf {

namespace {

// bump(r/s)^2 and radial derivatives.
struct Radial2 {
    double f, f1, f2;  // value, d/dr, d2/dr2
};
Radial2 bump_sq(double r, double s) {
    const double u = r / s;
    const double p = cutoff::bump(u);
    const double p1 = cutoff::bump_d(u) / s;
    const double p2 = cutoff::bump_dd(u) / (s * s);
    return {p * p, 2.0 * p * p1, 2.0 * (p1 * p1 + p * p2)};
}
Radial2 chi_sq(double r, double R) {
    const double u = r / R;
    const double c = 1.0 - cutoff::bump(u);
    const double c1 = -cutoff::bump_d(u) / R;
    const double c2 = -cutoff::bump_dd(u) / (R * R);
    return {c * c, 2.0 * c * c1, 2.0 * (c1 * c1 + c * c2)};
}

TestFunction::Spatial radial_eval(const Radial2& f, const Vec3& z) {
    const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    TestFunction::Spatial e;
    e.val = f.f;
    if (r < 1e-14) {
        e.grad = {0, 0, 0};
        e.lap = 3.0 * f.f2;
    } else {
        const double s = f.f1 / r;
        e.grad = {s * z[0], s * z[1], s * z[2]};
        e.lap = f.f2 + 2.0 * f.f1 / r;
    }
    return e;
}

}  // namespace

TestFunction TestFunction::plateau(const Grid& g, const Vec3& x0) {
    TestFunction tf;
    tf.grid_ = g;
    tf.x0_ = x0;
    tf.id_ = "plateau";
    // one cell margin so cell averages at the support edge are covered
    const auto& st = g.ball_stencil(1.5 + g.spacing());
    const int cx = g.wrap_node(x0[0]), cy = g.wrap_node(x0[1]), cz = g.wrap_node(x0[2]);
    const int n = g.n();
    for (const auto& d : st) {
        const int ix = ((cx + d[0]) % n + n) % n;
        const int iy = ((cy + d[1]) % n + n) % n;
        const int iz = ((cz + d[2]) % n + n) % n;
        tf.support_.push_back(g.index(ix, iy, iz));
    }
    return tf;
}

TestFunction TestFunction::plateau_chi(const Grid& g, const Vec3& x0, double R) {
    TestFunction tf = plateau(g, x0);
    tf.R_ = R;
    tf.id_ = "plateau_chi";
    return tf;
}

TestFunction& TestFunction::with_ramp(double t_on, double w) {
    t_on_ = t_on;
    t_w_ = w;
    return *this;
}

TestFunction::Spatial TestFunction::space(const Vec3& x) const {
    const Vec3 z = grid_.min_image(x, x0_);
    const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    const Spatial a = radial_eval(bump_sq(r, 1.0), z);
    if (R_ <= 0.0) return a;

    const Vec3 z0 = grid_.min_image(x, {0.0, 0.0, 0.0});
    const double r0 = std::sqrt(z0[0] * z0[0] + z0[1] * z0[1] + z0[2] * z0[2]);
    const Spatial b = radial_eval(chi_sq(r0, R_), z0);
    Spatial s;
    s.val = a.val * b.val;
    for (int c = 0; c < 3; ++c)
        s.grad[static_cast<std::size_t>(c)] = a.grad[static_cast<std::size_t>(c)] * b.val +
                                              a.val * b.grad[static_cast<std::size_t>(c)];
    s.lap = a.lap * b.val + a.val * b.lap +
            2.0 * (a.grad[0] * b.grad[0] + a.grad[1] * b.grad[1] + a.grad[2] * b.grad[2]);
    return s;
}

TestFunction::Spatial TestFunction::space_cell_avg(const Vec3& x) const {
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};
    const double half = 0.5 * grid_.spacing();
    Spatial acc{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                const Vec3 q = {x[0] + half * gx[i], x[1] + half * gx[j], x[2] + half * gx[k]};
                const Spatial s = space(q);
                const double w = gw[i] * gw[j] * gw[k] / 8.0;
                acc.val += w * s.val;
                acc.lap += w * s.lap;
                for (int c = 0; c < 3; ++c)
                    acc.grad[static_cast<std::size_t>(c)] += w * s.grad[static_cast<std::size_t>(c)];
            }
    return acc;
}

double TestFunction::theta(double t) const {
    if (t_on_ < 0.0) return 1.0;
    return cutoff::ramp(1.0 + (t - t_on_) / t_w_);
}

double TestFunction::theta_dot(double t) const {
    if (t_on_ < 0.0) return 0.0;
    return cutoff::ramp_d(1.0 + (t - t_on_) / t_w_) / t_w_;
}

TestFunction::Eval TestFunction::operator()(const Vec3& x, double t) const {
    const Spatial s = space(x);
    const double th = theta(t);
    Eval e;
    e.val = s.val * th;
    for (int c = 0; c < 3; ++c) e.grad[static_cast<std::size_t>(c)] = s.grad[static_cast<std::size_t>(c)] * th;
    e.lap = s.lap * th;
    e.dt = s.val * theta_dot(t);
    return e;
}

std::vector<double> theta_hat_weights(const std::vector<double>& times, std::size_t first,
                                      std::size_t last,
                                      const std::function<double(double)>& theta) {
    // 8-point Gauss-Legendre on [-1,1]
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    std::vector<double> w(last - first + 1, 0.0);
    for (std::size_t m = first; m < last; ++m) {
        const double a = times[m], b = times[m + 1];
        const double half = 0.5 * (b - a);
        for (int q = 0; q < 8; ++q) {
            const double t = 0.5 * (a + b) + half * gx[q];
            const double th = theta(t) * gw[q] * half;
            const double lam = (t - a) / (b - a);
            w[m - first] += th * (1.0 - lam);
            w[m + 1 - first] += th * lam;
        }
    }
    return w;
}

namespace {

// Third radial derivative of bump(r/s)^2 (for the gradient-type member).
double bump_sq_d3(double r, double s) {
    const double u = r / s;
    const double p = cutoff::bump(u);
    const double p1 = cutoff::bump_d(u);
    const double p2 = cutoff::bump_dd(u);
    double p3 = 0.0;
    if (u > 1.0 && u < 1.5) {
        const double q = 2.0 * (u - 1.0);
        p3 = 8.0 * (-60.0 * (1.0 - 6.0 * q + 6.0 * q * q));
    }
    return 2.0 * (3.0 * p1 * p2 + p * p3) / (s * s * s);
}

struct TimeWindow {
    double t_on, w_on, t_off, w_off;
    double val(double t) const {
        return cutoff::ramp(1.0 + (t - t_on) / w_on) * (1.0 - cutoff::ramp(1.0 + (t - t_off) / w_off));
    }
    double deriv(double t) const {
        const double a = cutoff::ramp(1.0 + (t - t_on) / w_on);
        const double ad = cutoff::ramp_d(1.0 + (t - t_on) / w_on) / w_on;
        const double b = 1.0 - cutoff::ramp(1.0 + (t - t_off) / w_off);
        const double bd = -cutoff::ramp_d(1.0 + (t - t_off) / w_off) / w_off;
        return ad * b + a * bd;
    }
};

std::vector<std::int64_t> ball_support(const Grid& g, const Vec3& c, double r) {
    std::vector<std::int64_t> sup;
    const auto& st = g.ball_stencil(r);
    const int cx = g.wrap_node(c[0]), cy = g.wrap_node(c[1]), cz = g.wrap_node(c[2]);
    const int n = g.n();
    for (const auto& d : st) {
        const int ix = ((cx + d[0]) % n + n) % n;
        const int iy = ((cy + d[1]) % n + n) % n;
        const int iz = ((cz + d[2]) % n + n) % n;
        sup.push_back(g.index(ix, iy, iz));
    }
    return sup;
}

}  // namespace

std::vector<WeakTestFunction> weak_test_family(const Grid& g, double T) {
    std::vector<WeakTestFunction> family;
    const TimeWindow win{0.15 * T, 0.25 * T, 0.6 * T, 0.25 * T};
    const auto theta = [win](double t) { return win.val(t); };
    const auto theta_dot = [win](double t) { return win.deriv(t); };
    // Two spatial scales: rho = 2 for clean far-support members, rho = 1 to
    // sample the same cutoff-kink severity the energy-inequality test
    // functions have (the budget transfer relies on this).
    struct Placement {
        Vec3 c;
        double rho;
    };
    const std::vector<Placement> placements = {
        {{0.0, 0.0, 0.0}, 2.0}, {{1.5, 1.0, 0.0}, 2.0}, {{0.0, 0.0, 0.0}, 1.0}};

    for (const auto& pl : placements)
        for (int dir = 0; dir < 3; ++dir) {
            WeakTestFunction tf;
            tf.id = "bump_rho" + std::to_string(static_cast<int>(pl.rho)) + "_dir" + std::to_string(dir);
            tf.support = ball_support(g, pl.c, 1.5 * pl.rho);
            const Grid grid = g;
            const Vec3 cc = pl.c;
            const double rho = pl.rho;
            tf.theta = theta;
            tf.theta_dot = theta_dot;
            tf.space = [grid, cc, dir, rho](const Vec3& x) {
                WeakTestFunction::Spatial e{};
                const Vec3 z = grid.min_image(x, cc);
                const auto s =
                    radial_eval(bump_sq(std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]), rho), z);
                e.vec[static_cast<std::size_t>(dir)] = s.val;
                e.lap[static_cast<std::size_t>(dir)] = s.lap;
                for (int j = 0; j < 3; ++j)
                    e.grad[static_cast<std::size_t>(3 * j + dir)] = s.grad[static_cast<std::size_t>(j)];
                e.div = s.grad[static_cast<std::size_t>(dir)];
                return e;
            };
            family.push_back(std::move(tf));
        }

    // Pure-gradient member zeta = theta grad(psi): div zeta = theta lap psi
    // is what couples to the pressure.
    for (const double rho : {2.0, 1.0}) {
        WeakTestFunction tf;
        tf.id = "gradient_rho" + std::to_string(static_cast<int>(rho));
        tf.support = ball_support(g, {0.0, 0.0, 0.0}, 1.5 * rho);
        const Grid grid = g;
        tf.theta = theta;
        tf.theta_dot = theta_dot;
        tf.space = [grid, rho](const Vec3& x) {
            WeakTestFunction::Spatial e{};
            const Vec3 z = grid.min_image(x, {0.0, 0.0, 0.0});
            const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
            if (r < 1e-14) return e;
            const Radial2 f = bump_sq(r, rho);
            const double f3 = bump_sq_d3(r, rho);
            const double B = (f.f2 - f.f1 / r) / (r * r);
            for (int i = 0; i < 3; ++i) {
                e.vec[static_cast<std::size_t>(i)] = f.f1 * z[static_cast<std::size_t>(i)] / r;
                // lap(d_i psi) = d_i(lap psi), lap psi = f'' + 2 f'/r
                const double glap = f3 + 2.0 * f.f2 / r - 2.0 * f.f1 / (r * r);
                e.lap[static_cast<std::size_t>(i)] = glap * z[static_cast<std::size_t>(i)] / r;
                for (int j = 0; j < 3; ++j) {
                    double hess = B * z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
                    if (i == j) hess += f.f1 / r;
                    e.grad[static_cast<std::size_t>(3 * j + i)] = hess;
                }
            }
            e.div = f.f2 + 2.0 * f.f1 / r;
            return e;
        };
        family.push_back(std::move(tf));
    }
    return family;
}

}  // namespace ulf
