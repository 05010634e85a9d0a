#pragma once

#include "ecgaf/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ecgaf::spectrogram {

struct StftConfig {
    std::size_t window = 75;     // Hamming window length, samples
    std::size_t hop = 12;        // 375 frames span 15 s at 300 Hz
    std::size_t fft_length = 128;
    std::size_t bins = 20;       // ~46.9 Hz at 300 Hz
    std::size_t tail_padding = 75;
    bool log_compress = true;    // log(1 + |X|)
};

/// Magnitude time-frequency matrix, `bins` rows by `frames` columns.
struct Spectrogram {
    Matrix magnitudes;
    double bin_hz = 0.0;
    std::size_t hop_samples = 0;
    double fs = 0.0;

    std::size_t frames() const { return magnitudes.cols; }
    std::size_t bins() const { return magnitudes.rows; }
};

/// A fixed-width model-input window anchored at a QRS peak.
struct SpectroSegment {
    Matrix matrix;
    std::size_t anchor_peak = 0;
};

inline constexpr std::size_t kMainWidth = 375;
inline constexpr std::size_t kSecondaryWidth = 225;

/// Hamming-windowed STFT magnitude of the tail-padded signal, cropped to the
/// lowest `bins` rows. Throws DataError when shorter than one window.
Spectrogram stft_magnitude(std::span<const double> samples, double fs, const StftConfig& cfg = {});

/// One `bins x width` block per peak whose start frame floor(peak / hop)
/// leaves room for `width` frames; other peaks are skipped.
std::vector<SpectroSegment> extract_segments(const Spectrogram& spec,
                                             std::span<const std::size_t> peaks,
                                             std::size_t width);

/// The block starting at `start_frame`; throws std::out_of_range if it does not fit.
SpectroSegment segment_at(const Spectrogram& spec, std::size_t start_frame, std::size_t width);

}  // namespace ecgaf::spectrogram
