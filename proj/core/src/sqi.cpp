#include "ecgaf/sqi.hpp"

#include "ecgaf/qrs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ecgaf::sqi {

namespace {

double sum_sq_dev(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return ss;
}

double median_of(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("pearson: length mismatch");
    }
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        return 0.0;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Feature template_match_sqi(std::span<const double> samples, double /*fs*/,
                           std::span<const std::size_t> peaks) {
    if (peaks.size() < 2) {
        return std::nullopt;
    }
    std::vector<double> rr;
    rr.reserve(peaks.size() - 1);
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        rr.push_back(static_cast<double>(peaks[i]) - static_cast<double>(peaks[i - 1]));
    }
    const double median_rr = median_of(rr);  // in samples, so fs cancels out
    const auto length = static_cast<std::size_t>(std::lround((kPreFraction + kPostFraction) * median_rr));
    const auto pre = static_cast<std::size_t>(std::lround(kPreFraction * median_rr));
    if (length < 2) {
        return std::nullopt;
    }

    std::vector<std::span<const double>> beats;
    for (std::size_t p : peaks) {
        if (p < pre || p - pre + length > samples.size()) {
            continue;
        }
        beats.push_back(samples.subspan(p - pre, length));
    }
    if (beats.size() < 2) {
        return std::nullopt;
    }

    std::vector<double> tmpl(length, 0.0);
    double beat_ss = 0.0;
    for (const auto& b : beats) {
        for (std::size_t i = 0; i < length; ++i) {
            tmpl[i] += b[i];
        }
        beat_ss += sum_sq_dev(b);
    }
    for (double& v : tmpl) {
        v /= static_cast<double>(beats.size());
    }
    // A template that is only cancellation residue carries no shape.
    if (sum_sq_dev(tmpl) <= 1e-20 * beat_ss / static_cast<double>(beats.size())) {
        return 0.0;
    }

    double total = 0.0;
    for (const auto& b : beats) {
        total += pearson(b, tmpl);
    }
    return total / static_cast<double>(beats.size());
}

double bsqi(std::span<const std::size_t> peaks_a, std::span<const std::size_t> peaks_b, double fs) {
    if (peaks_a.empty() && peaks_b.empty()) {
        return 1.0;
    }
    const auto tol = static_cast<std::size_t>(std::lround(qrs::kMatchToleranceSeconds * fs));
    const std::size_t matched = qrs::count_matches(peaks_a, peaks_b, tol);
    return static_cast<double>(matched) /
           static_cast<double>(peaks_a.size() + peaks_b.size() - matched);
}

}  // namespace ecgaf::sqi
