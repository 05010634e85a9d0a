#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ecgaf::qrs {

enum class Detector { PanTompkins, FilteredDerivative };

/// Strictly increasing R-peak sample indices, separated by at least the
/// refractory period.
struct QrsAnnotation {
    std::string record_id;
    std::vector<std::size_t> peaks;
    Detector detector = Detector::PanTompkins;
};

inline constexpr double kRefractorySeconds = 0.200;
inline constexpr double kRefineSeconds = 0.050;
inline constexpr double kMatchToleranceSeconds = 0.150;

/// Classic Pan-Tompkins: 5-15 Hz band-pass, five-point derivative, squaring,
/// 150 ms integration and dual adaptive thresholds with search-back.
/// Requires fs >= 100 and at least 2 s of signal (DataError "insufficient signal").
std::vector<std::size_t> detect_pan_tompkins(std::span<const double> samples, double fs);

/// Second, independent detector: 8-20 Hz band-pass, absolute derivative and a
/// rolling-percentile threshold. Same preconditions as detect_pan_tompkins.
std::vector<std::size_t> detect_filtered_derivative(std::span<const double> samples, double fs);

QrsAnnotation annotate(std::string record_id, std::span<const double> samples, double fs,
                       Detector detector);

/// Successive peak differences in milliseconds.
std::vector<double> rr_intervals_ms(std::span<const std::size_t> peaks, double fs);

/// Greedy one-to-one matching of two sorted peak lists; returns the number of
/// pairs closer than or equal to `tolerance` samples.
std::size_t count_matches(std::span<const std::size_t> a, std::span<const std::size_t> b,
                          std::size_t tolerance);

}  // namespace ecgaf::qrs
