#include "ecgaf/spectrogram.hpp"

#include "fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ecgaf::spectrogram {

Spectrogram stft_magnitude(std::span<const double> samples, double fs, const StftConfig& cfg) {
    if (cfg.window == 0 || cfg.hop == 0 || cfg.fft_length < cfg.window ||
        cfg.bins > cfg.fft_length / 2 + 1) {
        throw std::invalid_argument("invalid STFT configuration");
    }
    if (samples.size() < cfg.window) {
        throw DataError("signal shorter than one STFT window (" + std::to_string(cfg.window) +
                        " samples)");
    }
    std::vector<double> padded(samples.begin(), samples.end());
    padded.resize(samples.size() + cfg.tail_padding, 0.0);

    std::vector<double> hamming(cfg.window);
    for (std::size_t i = 0; i < cfg.window; ++i) {
        hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                            static_cast<double>(cfg.window - 1));
    }

    const std::size_t frames = (padded.size() - cfg.window) / cfg.hop + 1;
    Spectrogram spec;
    spec.magnitudes = Matrix(cfg.bins, frames);
    spec.bin_hz = fs / static_cast<double>(cfg.fft_length);
    spec.hop_samples = cfg.hop;
    spec.fs = fs;

    detail::RealDft dft(cfg.fft_length);
    std::vector<double> frame(cfg.window);
    for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t offset = t * cfg.hop;
        for (std::size_t i = 0; i < cfg.window; ++i) {
            frame[i] = padded[offset + i] * hamming[i];
        }
        const auto spectrum = dft.forward(frame);
        for (std::size_t f = 0; f < cfg.bins; ++f) {
            const double m = std::abs(spectrum[f]);
            spec.magnitudes(f, t) = cfg.log_compress ? std::log1p(m) : m;
        }
    }
    return spec;
}

SpectroSegment segment_at(const Spectrogram& spec, std::size_t start_frame, std::size_t width) {
    if (width == 0 || start_frame + width > spec.frames()) {
        throw std::out_of_range("segment exceeds spectrogram");
    }
    SpectroSegment seg;
    seg.matrix = Matrix(spec.bins(), width);
    seg.anchor_peak = start_frame * spec.hop_samples;
    for (std::size_t r = 0; r < spec.bins(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            seg.matrix(r, c) = spec.magnitudes(r, start_frame + c);
        }
    }
    return seg;
}

std::vector<SpectroSegment> extract_segments(const Spectrogram& spec,
                                             std::span<const std::size_t> peaks,
                                             std::size_t width) {
    std::vector<SpectroSegment> out;
    if (spec.hop_samples == 0 || width == 0) {
        return out;
    }
    for (std::size_t p : peaks) {
        const std::size_t start = p / spec.hop_samples;
        if (start + width > spec.frames()) {
            continue;
        }
        auto seg = segment_at(spec, start, width);
        seg.anchor_peak = p;
        out.push_back(std::move(seg));
    }
    return out;
}

}  // namespace ecgaf::spectrogram
