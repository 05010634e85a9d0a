#include "ecgaf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ecgaf::synth {

SynthRecord synth_ecg(const SynthOptions& o) {
    if (!(o.bpm >= 30.0 && o.bpm <= 300.0)) {
        throw std::invalid_argument("synth_ecg: bpm must be in [30, 300]");
    }
    if (!(o.duration_s >= 1.0) || !(o.fs > 0.0) || o.noise_sd < 0.0 || o.rr_jitter < 0.0 ||
        o.rr_jitter >= 1.0) {
        throw std::invalid_argument("synth_ecg: invalid options");
    }
    const auto n = static_cast<std::size_t>(std::llround(o.duration_s * o.fs));
    const double rr = 60.0 / o.bpm;

    SynthRecord out;
    out.record.id = o.id;
    out.record.sampling_rate = o.fs;
    out.record.samples.assign(n, 0.0);

    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> jitter(-o.rr_jitter, o.rr_jitter);
    std::vector<double> beat_times;
    for (double t = 0.5 * rr; t * o.fs < static_cast<double>(n);) {
        beat_times.push_back(t);
        t += o.rr_jitter > 0.0 ? rr * (1.0 + jitter(rng)) : rr;
    }

    const double sigma = kBumpSigmaSeconds * o.fs;
    const auto reach = static_cast<long long>(std::ceil(6.0 * sigma));
    for (double t : beat_times) {
        const double centre = t * o.fs;
        const long long c = std::llround(centre);
        out.peaks.push_back(static_cast<std::size_t>(c));
        for (long long i = std::max(0LL, c - reach);
             i <= c + reach && i < static_cast<long long>(n); ++i) {
            const double z = (static_cast<double>(i) - centre) / sigma;
            out.record.samples[static_cast<std::size_t>(i)] += kBumpAmplitude * std::exp(-0.5 * z * z);
        }
    }
    if (o.baseline_wander) {
        for (std::size_t i = 0; i < n; ++i) {
            out.record.samples[i] +=
                0.2 * std::sin(2.0 * std::numbers::pi * 0.3 * static_cast<double>(i) / o.fs);
        }
    }
    if (o.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, o.noise_sd);
        for (double& v : out.record.samples) {
            v += noise(rng);
        }
    }
    return out;
}

EcgRecord white_noise(double duration_s, double fs, double sd, std::uint64_t seed, std::string id) {
    if (!(duration_s > 0.0) || !(fs > 0.0) || !(sd > 0.0)) {
        throw std::invalid_argument("white_noise: invalid options");
    }
    EcgRecord r;
    r.id = std::move(id);
    r.sampling_rate = fs;
    r.samples.resize(static_cast<std::size_t>(std::llround(duration_s * fs)));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    for (double& v : r.samples) {
        v = noise(rng);
    }
    return r;
}

}  // namespace ecgaf::synth
