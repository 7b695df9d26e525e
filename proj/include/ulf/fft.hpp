/// @file fft.hpp
/// @brief Real-to-complex 3D transforms (FFTW backend, serial plans).
///
/// Plans are created once per grid with FFTW_ESTIMATE so planning is
/// deterministic. The inverse transform folds in the 1/N^3 normalization.
/// Half-spectrum layout: dims N x N x (N/2+1), kz fastest.

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace ulf {

class Grid;

using RealVec = std::vector<double>;
using CplxVec = std::vector<std::complex<double>>;

class Fft {
  public:
    explicit Fft(int n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::int64_t spec_size() const { return spec_size_; }

    /// Forward r2c. Input preserved.
    void forward(const RealVec& in, CplxVec& out);
    /// Inverse c2r, normalized by 1/N^3. Input preserved (internal scratch).
    void inverse(const CplxVec& in, RealVec& out);

    /// Spectral index helpers for the half spectrum.
    std::int64_t spec_index(int ix, int iy, int kz) const {
        return (static_cast<std::int64_t>(ix) * n_ + iy) * nz_ + kz;
    }
    int nz_half() const { return nz_; }

  private:
    int n_;
    int nz_;
    std::int64_t real_size_;
    std::int64_t spec_size_;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
    double* buf_real_ = nullptr;
    void* buf_cplx_ = nullptr;
};

}  // namespace ulf
