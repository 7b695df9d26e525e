#include "ulf/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "ulf/fft.hpp"

namespace ulf {

struct Grid::Shared {
    std::unique_ptr<Fft> fft;
    std::mutex stencil_mutex;
    std::map<std::int64_t, std::vector<std::array<int, 3>>> stencils;  // key: round(r/h*2^20)
};

namespace {
bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int N, double L) : n_(N), L_(L), h_(2.0 * L / N), k0_(M_PI / L) {
    shared_ = std::make_shared<Shared>();
}

Grid Grid::make(int N, double L) {
    std::ostringstream err;
    if (!is_pow2(N)) {
        err << "grid: N=" << N << " is not a power of two";
        throw ValidationError(err.str());
    }
    if (N < 16) {
        err << "grid: N=" << N << " < 16";
        throw ValidationError(err.str());
    }
    if (L < 8.0) {
        err << "grid: L=" << L << " < 8 (unit and radius-2 probe balls need margin)";
        throw ValidationError(err.str());
    }
    const double h = 2.0 * L / N;
    if (h > 0.25) {
        err << "grid: h=" << h << " > 1/4, unit-ball quadrature cannot resolve the cutoffs";
        throw ValidationError(err.str());
    }
    return Grid(N, L);
}

Grid Grid::make_unchecked(int N, double L) {
    if (!is_pow2(N) || N < 4 || L <= 0.0) throw ValidationError("grid: malformed parameters");
    return Grid(N, L);
}

int Grid::wrap_node(double x) const {
    const double u = (x + L_) / h_;
    long i = std::lround(u);
    i %= n_;
    if (i < 0) i += n_;
    return static_cast<int>(i);
}

double Grid::min_image(double d) const {
    const double period = 2.0 * L_;
    d = std::remainder(d, period);
    return d;
}

Vec3 Grid::min_image(const Vec3& a, const Vec3& b) const {
    return {min_image(a[0] - b[0]), min_image(a[1] - b[1]), min_image(a[2] - b[2])};
}

const std::vector<std::array<int, 3>>& Grid::ball_stencil(double r) const {
    const std::int64_t key = std::llround(r / h_ * 1048576.0);
    std::lock_guard<std::mutex> lock(shared_->stencil_mutex);
    auto it = shared_->stencils.find(key);
    if (it != shared_->stencils.end()) return it->second;
    std::vector<std::array<int, 3>> st;
    const int m = static_cast<int>(std::floor(r / h_)) + 1;
    const double r2 = r * r;
    for (int di = -m; di <= m; ++di)
        for (int dj = -m; dj <= m; ++dj)
            for (int dk = -m; dk <= m; ++dk) {
                const double d2 = (di * di + dj * dj + dk * dk) * h_ * h_;
                if (d2 <= r2 * (1.0 + 1e-12)) st.push_back({di, dj, dk});
            }
    auto res = shared_->stencils.emplace(key, std::move(st));
    return res.first->second;
}

double Grid::ball_volume(double r) const {
    return static_cast<double>(ball_stencil(r).size()) * h_ * h_ * h_;
}

Fft& Grid::fft() const {
    if (!shared_->fft) {
        std::lock_guard<std::mutex> lock(shared_->stencil_mutex);
        if (!shared_->fft) shared_->fft = std::make_unique<Fft>(n_);
    }
    return *shared_->fft;
}

}  // namespace ulf
