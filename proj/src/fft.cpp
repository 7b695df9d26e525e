#include "ulf/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace ulf {

namespace {
// FFTW planning is not thread-safe; executions via the new-array API are.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(int n) : n_(n), nz_(n / 2 + 1) {
    real_size_ = static_cast<std::int64_t>(n_) * n_ * n_;
    spec_size_ = static_cast<std::int64_t>(n_) * n_ * nz_;
    buf_real_ = fftw_alloc_real(real_size_);
    buf_cplx_ = fftw_alloc_complex(spec_size_);
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_3d(n_, n_, n_, buf_real_, static_cast<fftw_complex*>(buf_cplx_),
                                     FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_3d(n_, n_, n_, static_cast<fftw_complex*>(buf_cplx_), buf_real_,
                                     FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(buf_real_);
    fftw_free(buf_cplx_);
}

void Fft::forward(const RealVec& in, CplxVec& out) {
    std::memcpy(buf_real_, in.data(), sizeof(double) * real_size_);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    out.resize(static_cast<std::size_t>(spec_size_));
    std::memcpy(out.data(), buf_cplx_, sizeof(fftw_complex) * spec_size_);
}

void Fft::inverse(const CplxVec& in, RealVec& out) {
    std::memcpy(buf_cplx_, in.data(), sizeof(fftw_complex) * spec_size_);
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    out.resize(static_cast<std::size_t>(real_size_));
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::int64_t i = 0; i < real_size_; ++i) out[i] = buf_real_[i] * scale;
}

}  // namespace ulf
