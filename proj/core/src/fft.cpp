#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <stdexcept>

namespace ecgaf::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealDft::RealDft(std::size_t n) : n_(n) {
    if (n == 0) {
        throw std::invalid_argument("DFT length must be positive");
    }
    std::lock_guard lock(planner_mutex());
    in_ = fftw_alloc_real(n);
    auto* out = fftw_alloc_complex(n / 2 + 1);
    out_ = out;
    if (in_ == nullptr || out == nullptr) {
        fftw_free(in_);
        fftw_free(out);
        throw std::bad_alloc();
    }
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out, FFTW_ESTIMATE);
}

RealDft::~RealDft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_free(in_);
    fftw_free(out_);
}

std::span<const std::complex<double>> RealDft::forward(std::span<const double> input) {
    const std::size_t m = std::min(input.size(), n_);
    std::copy_n(input.begin(), m, in_);
    std::fill(in_ + m, in_ + n_, 0.0);
    fftw_execute(static_cast<fftw_plan>(plan_));
    // fftw_complex is layout-compatible with std::complex<double>.
    return {reinterpret_cast<const std::complex<double>*>(out_), bins()};
}

}  // namespace ecgaf::detail
