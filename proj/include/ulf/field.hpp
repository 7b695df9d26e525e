/// @file field.hpp
/// @brief Scalar/vector/tensor node samples on a Grid.
///
/// Fields are immutable by convention after construction: every operation in
/// the library takes fields by const reference and returns new ones, so
/// concurrent read-only use is safe.

#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "ulf/fft.hpp"
#include "ulf/grid.hpp"

namespace ulf {

class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double time = 0.0)
        : grid_(g), time_(time), data_(static_cast<std::size_t>(g.num_nodes()), 0.0) {}

    const Grid& grid() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    const RealVec& data() const { return data_; }
    RealVec& data() { return data_; }

  private:
    Grid grid_;
    double time_ = 0.0;
    RealVec data_;
};

class VectorField {
  public:
    VectorField() = default;
    explicit VectorField(const Grid& g, double time = 0.0) : grid_(g), time_(time) {
        for (auto& c : comp_) c.assign(static_cast<std::size_t>(g.num_nodes()), 0.0);
    }

    const Grid& grid() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    const RealVec& comp(int c) const { return comp_[static_cast<std::size_t>(c)]; }
    RealVec& comp(int c) { return comp_[static_cast<std::size_t>(c)]; }

    double value(int c, std::int64_t i) const { return comp_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]; }

    /// Euclidean magnitude at a node.
    double magnitude(std::int64_t i) const {
        const auto s = static_cast<std::size_t>(i);
        return std::sqrt(comp_[0][s] * comp_[0][s] + comp_[1][s] * comp_[1][s] + comp_[2][s] * comp_[2][s]);
    }

  private:
    Grid grid_;
    double time_ = 0.0;
    std::array<RealVec, 3> comp_;
};

class TensorField {
  public:
    TensorField() = default;
    explicit TensorField(const Grid& g, double time = 0.0) : grid_(g), time_(time) {
        for (auto& c : comp_) c.assign(static_cast<std::size_t>(g.num_nodes()), 0.0);
    }

    const Grid& grid() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    const RealVec& comp(int i, int j) const { return comp_[static_cast<std::size_t>(3 * i + j)]; }
    RealVec& comp(int i, int j) { return comp_[static_cast<std::size_t>(3 * i + j)]; }
    const RealVec& comp(int c) const { return comp_[static_cast<std::size_t>(c)]; }
    RealVec& comp(int c) { return comp_[static_cast<std::size_t>(c)]; }

  private:
    Grid grid_;
    double time_ = 0.0;
    std::array<RealVec, 9> comp_;
};

/// Spectral (half-spectrum) image of a vector field.
struct SpectralVec {
    Grid grid;
    double time = 0.0;
    std::array<CplxVec, 3> comp;
};

/// Fill a scalar field from f(x) at the nodes.
ScalarField sample_scalar(const Grid& g, const std::function<double(const Vec3&)>& f, double time = 0.0);
/// Fill a vector field from f(x) at the nodes.
VectorField sample_vector(const Grid& g, const std::function<Vec3(const Vec3&)>& f, double time = 0.0);

bool all_finite(const ScalarField& f);
bool all_finite(const VectorField& f);

double max_abs(const ScalarField& f);
double max_abs(const VectorField& f);

/// Nodewise |v|^2 as a scalar field.
ScalarField magnitude_squared(const VectorField& v);

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);

}  // namespace ulf
