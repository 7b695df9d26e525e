#include "ulf/trajectory.hpp"

#include <cmath>
#include <sstream>

namespace ulf {

void Trajectory::push_back(double t, VectorField v) {
    if (times_.empty()) {
        if (t < 0.0) throw ValidationError("trajectory: times[0] < 0");
        grid_ = v.grid();
    } else {
        if (t <= times_.back()) throw ValidationError("trajectory: times not strictly increasing");
        if (v.grid() != grid_) throw ValidationError("trajectory: snapshot grid mismatch");
    }
    v.set_time(t);
    times_.push_back(t);
    snapshots_.push_back(std::move(v));
}

void Trajectory::attach_pressure(std::size_t i, ScalarField p) {
    if (i >= times_.size()) throw ValidationError("trajectory: pressure index out of range");
    if (pressures_.empty()) pressures_.resize(times_.size(), ScalarField(grid_));
    p.set_time(times_[i]);
    pressures_[i] = std::move(p);
}

std::size_t Trajectory::index_of(double t) const {
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (std::abs(times_[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
    std::ostringstream err;
    err << "trajectory: t=" << t << " is not a snapshot time";
    throw ValidationError(err.str());
}

std::pair<std::size_t, std::size_t> Trajectory::window(double t0, double t1) const {
    const std::size_t a = index_of(t0);
    const std::size_t b = index_of(t1);
    if (b < a) throw ValidationError("trajectory: empty time window");
    return {a, b};
}

std::vector<double> trapezoid_weights(const std::vector<double>& times, std::size_t first,
                                      std::size_t last) {
    std::vector<double> w(last - first + 1, 0.0);
    for (std::size_t i = first; i < last; ++i) {
        const double dt = times[i + 1] - times[i];
        w[i - first] += 0.5 * dt;
        w[i + 1 - first] += 0.5 * dt;
    }
    return w;
}

}  // namespace ulf
