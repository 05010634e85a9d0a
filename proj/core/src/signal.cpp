#include "ecgaf/signal.hpp"

#include "ecgaf/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ecgaf::signal {

namespace {

void require_finite(std::span<const double> samples) {
    for (double v : samples) {
        if (!std::isfinite(v)) {
            throw DataError("invalid signal");
        }
    }
}

struct Biquad {
    double b0, b1, b2, a1, a2;

    void run(std::vector<double>& x) const {
        double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
        for (double& v : x) {
            const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = v;
            y2 = y1;
            y1 = y;
            v = y;
        }
    }
};

// Audio-EQ-cookbook Butterworth sections (Q = 1/sqrt(2)).
Biquad butter_lowpass(double fs, double fc) {
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0, -2.0 * c / a0,
            (1.0 - alpha) / a0};
}

Biquad butter_highpass(double fs, double fc) {
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0, -2.0 * c / a0,
            (1.0 - alpha) / a0};
}

}  // namespace

std::size_t baseline_window(double fs) {
    if (!(fs > 0.0)) {
        throw std::invalid_argument("sampling rate must be positive");
    }
    const double target = 0.6 * fs;
    // nearest odd integer: 2 * round((target - 1) / 2) + 1
    const double half = std::floor((target - 1.0) / 2.0 + 0.5);
    return static_cast<std::size_t>(std::max(0.0, half)) * 2 + 1;
}

std::vector<double> moving_average(std::span<const double> samples, std::size_t width) {
    if (width % 2 == 0) {
        throw std::invalid_argument("moving average width must be odd");
    }
    const std::size_t n = samples.size();
    const std::size_t half = width / 2;
    std::vector<long double> prefix(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + samples[i];
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        out[i] = static_cast<double>((prefix[hi] - prefix[lo]) / static_cast<long double>(hi - lo));
    }
    return out;
}

std::vector<double> remove_baseline(std::span<const double> samples, double fs) {
    if (samples.empty()) {
        throw DataError("invalid signal");
    }
    require_finite(samples);
    const auto trend = moving_average(samples, baseline_window(fs));
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = samples[i] - trend[i];
    }
    return out;
}

std::vector<double> resample_linear(std::span<const double> samples, double fs_in, double fs_out) {
    if (!(fs_in > 0.0) || !(fs_out > 0.0)) {
        throw std::invalid_argument("sampling rates must be positive");
    }
    if (samples.size() < 2) {
        throw DataError("too short to resample");
    }
    require_finite(samples);
    const std::size_t n = samples.size();
    const double span_out = static_cast<double>(n - 1) * fs_out / fs_in;
    const auto n_out = static_cast<std::size_t>(std::floor(span_out + 1e-9)) + 1;

    std::vector<double> out(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
        const double pos = static_cast<double>(j) * fs_in / fs_out;
        auto i = static_cast<std::size_t>(std::floor(pos));
        if (i >= n - 1) {
            i = n - 2;
        }
        const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
        out[j] = frac == 0.0 ? samples[i]
                 : frac == 1.0 ? samples[i + 1]
                               : samples[i] + frac * (samples[i + 1] - samples[i]);
    }
    return out;
}

std::vector<double> normalize_unit(std::span<const double> samples) {
    if (samples.empty()) {
        throw DataError("invalid signal");
    }
    require_finite(samples);
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> out(samples.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = std::clamp((samples[i] - lo) / range, 0.0, 1.0);
    }
    return out;
}

std::vector<double> bandpass_zero_phase(std::span<const double> samples, double fs, double low_hz,
                                        double high_hz) {
    if (!(fs > 0.0) || !(low_hz > 0.0) || !(high_hz > low_hz) || !(high_hz < fs / 2.0)) {
        throw std::invalid_argument("invalid band-pass specification");
    }
    const std::size_t n = samples.size();
    if (n == 0) {
        return {};
    }
    const Biquad hp = butter_highpass(fs, low_hz);
    const Biquad lp = butter_lowpass(fs, high_hz);

    // Odd reflection at both ends suppresses start-up transients.
    const std::size_t pad = std::min(n - 1, static_cast<std::size_t>(std::lround(fs)));
    std::vector<double> x;
    x.reserve(n + 2 * pad);
    for (std::size_t k = pad; k >= 1; --k) {
        x.push_back(2.0 * samples[0] - samples[k]);
    }
    x.insert(x.end(), samples.begin(), samples.end());
    for (std::size_t k = 1; k <= pad; ++k) {
        x.push_back(2.0 * samples[n - 1] - samples[n - 1 - k]);
    }

    hp.run(x);
    lp.run(x);
    std::reverse(x.begin(), x.end());
    hp.run(x);
    lp.run(x);
    std::reverse(x.begin(), x.end());

    return {x.begin() + static_cast<std::ptrdiff_t>(pad),
            x.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace ecgaf::signal
