#pragma once

#include "ecgaf/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ecgaf::synth {

struct SynthOptions {
    double bpm = 75.0;           // 30..300
    double duration_s = 10.0;    // >= 1
    double fs = 300.0;
    double noise_sd = 0.0;       // mV, additive white Gaussian
    std::uint64_t seed = 0;
    bool baseline_wander = false;  // 0.3 Hz, 0.2 mV sinusoid
    double rr_jitter = 0.0;      // each RR scaled by 1 + U(-jitter, jitter)
    std::string id = "synth";
};

struct SynthRecord {
    EcgRecord record;
    std::vector<std::size_t> peaks;  // ground-truth R-peak indices
};

inline constexpr double kBumpSigmaSeconds = 0.015;
inline constexpr double kBumpAmplitude = 1.0;

/// Gaussian-bump ECG surrogate; the first beat sits half an RR interval in.
SynthRecord synth_ecg(const SynthOptions& options);

/// Zero-mean white Gaussian noise with no beats.
EcgRecord white_noise(double duration_s, double fs, double sd, std::uint64_t seed,
                      std::string id = "noise");

}  // namespace ecgaf::synth
