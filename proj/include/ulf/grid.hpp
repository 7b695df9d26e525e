/// @file grid.hpp
/// @brief Periodic lattice over [-L,L)^3 with spectral transform tables.
///
/// The grid is the discrete stand-in for R^3: data of interest is kept
/// supported (or centered) away from the periodic seam, and probe centers
/// march out to distance L/2 instead of |x0| -> infinity.
///
/// Node layout is C row-major arr[ix][iy][iz] (iz fastest), coordinate
/// x_i = -L + i*h. Linear index = (ix*N + iy)*N + iz.

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace ulf {

using Vec3 = std::array<double, 3>;

/// Thrown on precondition violations (CLI maps it to exit code 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on numerical failures such as non-contraction (exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Fft;

class Grid {
  public:
    /// Checked factory: N a power of two >= 16, L >= 8, h = 2L/N <= 1/4,
    /// so that unit balls and the radius-3/2 and radius-2 balls fit with
    /// margin and the unit-ball quadrature resolves the cutoffs.
    static Grid make(int N, double L);

    /// Unchecked factory for reduced-size internal grids (unit tests and
    /// the check-kernels --n override run with wider budgets there).
    static Grid make_unchecked(int N, double L);

    int n() const { return n_; }
    double half_length() const { return L_; }
    double spacing() const { return h_; }
    std::int64_t num_nodes() const { return static_cast<std::int64_t>(n_) * n_ * n_; }

    double coord(int i) const { return -L_ + h_ * i; }
    std::int64_t index(int ix, int iy, int iz) const {
        return (static_cast<std::int64_t>(ix) * n_ + iy) * n_ + iz;
    }
    Vec3 node(std::int64_t idx) const {
        const int iz = static_cast<int>(idx % n_);
        const int iy = static_cast<int>((idx / n_) % n_);
        const int ix = static_cast<int>(idx / (static_cast<std::int64_t>(n_) * n_));
        return {coord(ix), coord(iy), coord(iz)};
    }

    /// Nearest node index along one axis (coordinates wrap periodically).
    int wrap_node(double x) const;

    /// Signed displacement a-b reduced to the minimal periodic image.
    double min_image(double d) const;
    Vec3 min_image(const Vec3& a, const Vec3& b) const;

    /// Fundamental wavenumber pi/L; spectral index m in [-N/2, N/2).
    double k_fundamental() const { return k0_; }
    /// Physical wavenumber of spectral index i along a full axis.
    double wavenumber(int i) const { return k0_ * (i <= n_ / 2 ? i : i - n_); }
    /// Derivative multiplier: like wavenumber() but with the Nyquist zeroed.
    double deriv_wavenumber(int i) const {
        if (i == n_ / 2) return 0.0;
        return wavenumber(i);
    }

    /// Relative offsets (di,dj,dk) with |offset*h| <= r, fixed lexicographic
    /// order. Shared per (grid,r); used for ball quadratures everywhere.
    const std::vector<std::array<int, 3>>& ball_stencil(double r) const;

    /// Node count times h^3 for the ball stencil (discrete ball volume).
    double ball_volume(double r) const;

    Fft& fft() const;

    bool operator==(const Grid& o) const { return n_ == o.n_ && L_ == o.L_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    /// Default-constructed grids are empty placeholders (n() == 0).
    Grid() = default;

  private:
    Grid(int N, double L);

    int n_ = 0;
    double L_ = 0.0;
    double h_ = 0.0;
    double k0_ = 0.0;
    struct Shared;
    std::shared_ptr<Shared> shared_;
};

}  // namespace ulf
