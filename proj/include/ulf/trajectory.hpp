/// @file trajectory.hpp
/// @brief Time-stamped sequence of velocity fields plus optional pressures.

#pragma once

#include <optional>
#include <vector>

#include "ulf/field.hpp"

namespace ulf {

class Trajectory {
  public:
    Trajectory() = default;
    explicit Trajectory(const Grid& g) : grid_(g) {}

    const Grid& grid() const { return grid_; }
    const std::vector<double>& times() const { return times_; }
    std::size_t size() const { return times_.size(); }

    const VectorField& snapshot(std::size_t i) const { return snapshots_[i]; }
    VectorField& snapshot(std::size_t i) { return snapshots_[i]; }

    bool has_pressure() const { return !pressures_.empty(); }
    const ScalarField& pressure(std::size_t i) const { return pressures_[i]; }

    /// Appends a snapshot; times must stay strictly increasing and
    /// times[0] >= 0, all snapshots share one grid.
    void push_back(double t, VectorField v);
    void attach_pressure(std::size_t i, ScalarField p);

    /// Index of the snapshot at time t (within 1e-9 absolute); throws
    /// ValidationError when t is not a snapshot time.
    std::size_t index_of(double t) const;
    /// Index range [first, last] covering [t0, t1] (both snapshot times).
    std::pair<std::size_t, std::size_t> window(double t0, double t1) const;

  private:
    Grid grid_;
    std::vector<double> times_;
    std::vector<VectorField> snapshots_;
    std::vector<ScalarField> pressures_;
};

/// Trapezoid weights for the sub-grid times[first..last].
std::vector<double> trapezoid_weights(const std::vector<double>& times, std::size_t first,
                                      std::size_t last);

}  // namespace ulf
