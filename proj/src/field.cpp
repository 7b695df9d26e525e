#include "ulf/field.hpp"

#include <cmath>

#include "ulf/kernels_core.hpp"
#include "ulf/parallel.hpp"

namespace ulf {

ScalarField sample_scalar(const Grid& g, const std::function<double(const Vec3&)>& f, double time) {
    ScalarField out(g, time);
    parallel_for(g.num_nodes(), [&](std::int64_t i) { out[i] = f(g.node(i)); });
    return out;
}

VectorField sample_vector(const Grid& g, const std::function<Vec3(const Vec3&)>& f, double time) {
    VectorField out(g, time);
    parallel_for(g.num_nodes(), [&](std::int64_t i) {
        const Vec3 v = f(g.node(i));
        out.comp(0)[static_cast<std::size_t>(i)] = v[0];
        out.comp(1)[static_cast<std::size_t>(i)] = v[1];
        out.comp(2)[static_cast<std::size_t>(i)] = v[2];
    });
    return out;
}

bool all_finite(const ScalarField& f) {
    for (double v : f.data())
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const VectorField& f) {
    for (int c = 0; c < 3; ++c)
        for (double v : f.comp(c))
            if (!std::isfinite(v)) return false;
    return true;
}

double max_abs(const ScalarField& f) { return core::field_max_abs(f.data(), 64); }

double max_abs(const VectorField& f) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, core::field_max_abs(f.comp(c), 64));
    return m;
}

ScalarField magnitude_squared(const VectorField& v) {
    ScalarField out(v.grid(), v.time());
    const auto& a = v.comp(0);
    const auto& b = v.comp(1);
    const auto& c = v.comp(2);
    parallel_for(v.grid().num_nodes(), [&](std::int64_t i) {
        const auto s = static_cast<std::size_t>(i);
        out[i] = a[s] * a[s] + b[s] * b[s] + c[s] * c[s];
    });
    return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
    VectorField out = a;
    for (int c = 0; c < 3; ++c) core::axpby(1.0, b.comp(c), 1.0, out.comp(c));
    return out;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
    VectorField out = a;
    for (int c = 0; c < 3; ++c) core::axpby(-1.0, b.comp(c), 1.0, out.comp(c));
    return out;
}

VectorField operator*(double s, const VectorField& a) {
    VectorField out = a;
    for (int c = 0; c < 3; ++c) core::axpby(0.0, a.comp(c), s, out.comp(c));
    return out;
}

}  // namespace ulf
