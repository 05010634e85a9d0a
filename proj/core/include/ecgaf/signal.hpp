#pragma once

#include <cstddef>
#include <span>
#include <vector>

/// Waveform conditioning.
namespace ecgaf::signal {

/// Width (odd, >= 1) of the baseline moving-average window at sampling rate fs:
/// the odd integer nearest to 0.6 * fs, rounding up on ties.
std::size_t baseline_window(double fs);

/// Centered moving average of odd width; windows are truncated at the edges.
std::vector<double> moving_average(std::span<const double> samples, std::size_t width);

/// Subtracts a 0.6 s centered moving average. Throws DataError("invalid signal")
/// on non-finite input.
std::vector<double> remove_baseline(std::span<const double> samples, double fs);

/// Linear interpolation onto the fs_out grid covering the same time span.
/// Output length is floor((n - 1) * fs_out / fs_in) + 1.
std::vector<double> resample_linear(std::span<const double> samples, double fs_in, double fs_out);

/// Affine map to [0, 1]. A constant input maps to 0.5 everywhere.
std::vector<double> normalize_unit(std::span<const double> samples);

/// Zero-phase IIR band-pass (2nd-order Butterworth high-pass followed by a
/// 2nd-order Butterworth low-pass, each run forward and backward).
std::vector<double> bandpass_zero_phase(std::span<const double> samples, double fs,
                                        double low_hz, double high_hz);

}  // namespace ecgaf::signal
