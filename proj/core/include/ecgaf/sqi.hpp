#pragma once

#include "ecgaf/types.hpp"

#include <cstddef>
#include <span>

/// Signal-quality indices.
namespace ecgaf::sqi {

struct SqiResult {
    Feature template_sqi;  // in [-1, 1], missing with fewer than 2 complete beats
    double bsqi = 1.0;     // in [0, 1]
};

/// Beat-window geometry relative to the median RR interval.
inline constexpr double kPreFraction = 0.25;
inline constexpr double kPostFraction = 0.45;

/// Mean Pearson correlation between each complete QRS-aligned beat and the
/// average beat. Missing when fewer than 2 complete beats are available.
Feature template_match_sqi(std::span<const double> samples, double fs,
                           std::span<const std::size_t> peaks);

/// Agreement of two detectors: matched / (|A| + |B| - matched) with 150 ms
/// greedy matching. Two empty lists agree perfectly.
double bsqi(std::span<const std::size_t> peaks_a, std::span<const std::size_t> peaks_b, double fs);

/// Pearson correlation; 0 when either input has (numerically) zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace ecgaf::sqi
