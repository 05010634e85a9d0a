#include "ecgaf/qrs.hpp"

#include "ecgaf/signal.hpp"
#include "ecgaf/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace ecgaf::qrs {

namespace {

// Noise-floor multiple of the rolling median of |derivative| that a filtered-
// derivative event must also exceed; rejects pure broadband noise.
constexpr double kNoiseFloorRatio = 6.0;
constexpr double kMinRelativeEnergy = 1e-3;

void check_input(std::span<const double> samples, double fs) {
    if (!(fs >= 100.0)) {
        throw DataError("insufficient signal: sampling rate below 100 Hz");
    }
    if (static_cast<double>(samples.size()) < 2.0 * fs) {
        throw DataError("insufficient signal");
    }
    for (double v : samples) {
        if (!std::isfinite(v)) {
            throw DataError("invalid signal");
        }
    }
}

std::size_t seconds_to_samples(double seconds, double fs) {
    return static_cast<std::size_t>(std::lround(seconds * fs));
}

// Five-point derivative (no delay), in amplitude units per second.
std::vector<double> five_point_derivative(std::span<const double> x, double fs) {
    const std::size_t n = x.size();
    auto at = [&](std::ptrdiff_t i) {
        return x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1))];
    };
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::ptrdiff_t>(k);
        d[k] = (-at(i - 2) - 2.0 * at(i - 1) + 2.0 * at(i + 1) + at(i + 2)) * fs / 8.0;
    }
    return d;
}

std::size_t argmax(std::span<const double> x, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i) {
        if (x[i] > x[best]) {
            best = i;
        }
    }
    return best;
}

// Moves each detection to the largest band-passed sample within +-50 ms and
// re-applies the refractory period, keeping the stronger of two close peaks.
std::vector<std::size_t> refine(std::span<const std::size_t> detections, std::span<const double> bp,
                                double fs) {
    const std::size_t radius = seconds_to_samples(kRefineSeconds, fs);
    const std::size_t refractory = seconds_to_samples(kRefractorySeconds, fs);
    std::vector<std::size_t> refined;
    refined.reserve(detections.size());
    for (std::size_t d : detections) {
        const std::size_t lo = d > radius ? d - radius : 0;
        const std::size_t hi = std::min(bp.size(), d + radius + 1);
        refined.push_back(argmax(bp, lo, hi));
    }
    std::sort(refined.begin(), refined.end());

    std::vector<std::size_t> kept;
    for (std::size_t p : refined) {
        if (!kept.empty() && p - kept.back() < refractory) {
            if (bp[p] > bp[kept.back()]) {
                kept.back() = p;
            }
            continue;
        }
        kept.push_back(p);
    }
    return kept;
}

}  // namespace

std::vector<std::size_t> detect_pan_tompkins(std::span<const double> samples, double fs) {
    check_input(samples, fs);
    const std::size_t n = samples.size();

    const auto bp = signal::bandpass_zero_phase(samples, fs, 5.0, 15.0);
    auto sq = five_point_derivative(bp, fs);
    for (double& v : sq) {
        v *= v;
    }
    std::size_t integ = seconds_to_samples(0.150, fs);
    if (integ % 2 == 0) {
        ++integ;
    }
    const auto mwi = signal::moving_average(sq, integ);

    const double global_max = *std::max_element(mwi.begin(), mwi.end());
    if (!(global_max > 0.0)) {
        return {};
    }

    // Candidates dominate their +-refractory neighbourhood; filter ringing in
    // silent stretches is not a candidate.
    const double floor = kMinRelativeEnergy * global_max;
    const std::size_t refractory = seconds_to_samples(kRefractorySeconds, fs);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1] && mwi[i] > floor)) {
            continue;
        }
        const std::size_t lo = i > refractory ? i - refractory : 0;
        const std::size_t hi = std::min(n, i + refractory + 1);
        bool dominant = true;
        for (std::size_t j = lo; j < hi && dominant; ++j) {
            dominant = j < i ? mwi[j] < mwi[i] : mwi[j] <= mwi[i];
        }
        if (dominant) {
            candidates.push_back(i);
        }
    }

    const std::size_t learn = std::min(n, seconds_to_samples(2.0, fs));
    const double learn_max = *std::max_element(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn));
    const double learn_mean =
        std::accumulate(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn), 0.0) / static_cast<double>(learn);

    double spki = 0.25 * learn_max;
    double npki = 0.5 * learn_mean;
    auto threshold1 = [&] { return npki + 0.25 * (spki - npki); };

    std::deque<double> recent_rr;  // last 8 RR intervals, in samples
    double rr_average = fs;        // 60 bpm until learned

    std::vector<std::size_t> qrs;
    std::vector<std::size_t> noise_peaks;

    auto accept = [&](std::size_t idx) {
        if (!qrs.empty()) {
            recent_rr.push_back(static_cast<double>(idx - qrs.back()));
            if (recent_rr.size() > 8) {
                recent_rr.pop_front();
            }
            rr_average = std::accumulate(recent_rr.begin(), recent_rr.end(), 0.0) /
                         static_cast<double>(recent_rr.size());
        }
        qrs.push_back(idx);
    };

    for (std::size_t c : candidates) {
        // search-back for a missed beat
        while (!qrs.empty() && static_cast<double>(c - qrs.back()) > 1.66 * rr_average) {
            const double threshold2 = 0.5 * threshold1();
            std::optional<std::size_t> best;
            for (std::size_t p : noise_peaks) {
                if (p >= qrs.back() + refractory && p + refractory <= c && mwi[p] > threshold2 &&
                    (!best || mwi[p] > mwi[*best])) {
                    best = p;
                }
            }
            if (!best) {
                break;
            }
            spki = 0.25 * mwi[*best] + 0.75 * spki;
            accept(*best);
            std::erase_if(noise_peaks, [&](std::size_t p) { return p <= *best; });
        }

        if (!qrs.empty() && c - qrs.back() < refractory) {
            continue;
        }
        const double v = mwi[c];
        if (v > threshold1()) {
            spki = 0.125 * v + 0.875 * spki;
            accept(c);
            noise_peaks.clear();
        } else {
            npki = 0.125 * v + 0.875 * npki;
            noise_peaks.push_back(c);
        }
    }

    return refine(qrs, bp, fs);
}

std::vector<std::size_t> detect_filtered_derivative(std::span<const double> samples, double fs) {
    check_input(samples, fs);
    const std::size_t n = samples.size();

    const auto bp = signal::bandpass_zero_phase(samples, fs, 8.0, 20.0);
    auto ad = five_point_derivative(bp, fs);
    for (double& v : ad) {
        v = std::abs(v);
    }
    if (!(*std::max_element(ad.begin(), ad.end()) > 0.0)) {
        return {};
    }

    // Rolling 2 s statistics, evaluated every 0.1 s and held in between.
    const std::size_t half_window = seconds_to_samples(1.0, fs);
    const std::size_t stride = std::max<std::size_t>(1, seconds_to_samples(0.1, fs));
    std::vector<double> threshold(n);
    std::vector<double> scratch;
    for (std::size_t start = 0; start < n; start += stride) {
        const std::size_t centre = std::min(n - 1, start + stride / 2);
        const std::size_t lo = centre > half_window ? centre - half_window : 0;
        const std::size_t hi = std::min(n, centre + half_window + 1);
        scratch.assign(ad.begin() + static_cast<std::ptrdiff_t>(lo), ad.begin() + static_cast<std::ptrdiff_t>(hi));
        const auto p95_pos = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(scratch.size() - 1)));
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(p95_pos), scratch.end());
        const double p95 = scratch[p95_pos];
        const std::size_t mid = (scratch.size() - 1) / 2;
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(mid), scratch.end());
        const double median = scratch[mid];
        const double t = std::max(0.4 * p95, kNoiseFloorRatio * median);
        std::fill(threshold.begin() + static_cast<std::ptrdiff_t>(start),
                  threshold.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + stride)), t);
    }

    const std::size_t refractory = seconds_to_samples(kRefractorySeconds, fs);
    const std::size_t event_span = seconds_to_samples(0.100, fs);
    std::vector<std::size_t> detections;
    std::size_t i = 0;
    while (i < n) {
        if (ad[i] > threshold[i] && threshold[i] > 0.0) {
            const std::size_t hi = std::min(n, i + event_span + 1);
            std::size_t best = i;
            for (std::size_t k = i; k < hi; ++k) {
                if (ad[k] > ad[best]) {
                    best = k;
                }
            }
            detections.push_back(best);
            i = best + refractory;
            continue;
        }
        ++i;
    }
    return refine(detections, bp, fs);
}

QrsAnnotation annotate(std::string record_id, std::span<const double> samples, double fs,
                       Detector detector) {
    QrsAnnotation a;
    a.record_id = std::move(record_id);
    a.detector = detector;
    a.peaks = detector == Detector::PanTompkins ? detect_pan_tompkins(samples, fs)
                                                : detect_filtered_derivative(samples, fs);
    return a;
}

std::vector<double> rr_intervals_ms(std::span<const std::size_t> peaks, double fs) {
    std::vector<double> rr;
    if (peaks.size() < 2) {
        return rr;
    }
    rr.reserve(peaks.size() - 1);
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        if (peaks[i] <= peaks[i - 1]) {
            throw std::invalid_argument("peaks must be strictly increasing");
        }
        rr.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) * 1000.0 / fs);
    }
    return rr;
}

std::size_t count_matches(std::span<const std::size_t> a, std::span<const std::size_t> b,
                          std::size_t tolerance) {
    std::size_t i = 0, j = 0, matched = 0;
    while (i < a.size() && j < b.size()) {
        const std::size_t diff = a[i] > b[j] ? a[i] - b[j] : b[j] - a[i];
        if (diff <= tolerance) {
            ++matched;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return matched;
}

}  // namespace ecgaf::qrs
