#pragma once

#include "ecgaf/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

/// The 437-dimensional hand-crafted feature set used by the NSR/O arbiter.
namespace ecgaf::features {

enum class Category { SignalQuality, Frequency, BeatToBeat, PhaseSpace, PoincareSection };

inline constexpr std::size_t kSignalQualityCount = 2;
inline constexpr std::size_t kFrequencyCount = 10;
inline constexpr std::size_t kBeatToBeatCount = 11;
inline constexpr std::size_t kPhaseSpaceCount = 401;
inline constexpr std::size_t kPoincareCount = 13;
inline constexpr std::size_t kFeatureCount =
    kSignalQualityCount + kFrequencyCount + kBeatToBeatCount + kPhaseSpaceCount + kPoincareCount;
static_assert(kFeatureCount == 437);

inline constexpr std::size_t kGridSize = 20;
inline constexpr std::size_t kEmbeddingDelay = 4;

struct FeatureInfo {
    std::string name;
    Category category;
};

/// Fixed, ordered registry of feature names.
const std::vector<FeatureInfo>& registry();
/// [first, first + count) slice of the registry occupied by a category.
std::pair<std::size_t, std::size_t> category_range(Category c);

struct FeatureVector {
    std::array<Feature, kFeatureCount> values{};

    Feature& operator[](std::size_t i) { return values[i]; }
    const Feature& operator[](std::size_t i) const { return values[i]; }
    static constexpr std::size_t size() { return kFeatureCount; }
};

/// 2-D delay embedding (x_i, x_{i+4}) of an already unit-normalized signal.
struct PhaseSpace {
    std::vector<std::pair<double, double>> points;
};

/// Nine band medians of the full-length periodogram followed by the 5-14 / 5-50 Hz
/// power ratio. Bands are clipped at Nyquist; empty bands are missing.
std::array<Feature, kFrequencyCount> band_power_features(std::span<const double> samples, double fs);

/// count, min, max, median, mean, SDNN, RMSSD, mean HR, PI, GI, SI.
std::array<Feature, kBeatToBeatCount> rr_statistics(std::span<const double> rr_ms);

struct HraIndices {
    Feature pi;
    Feature gi;
    Feature si;
};

/// Heart-rate asymmetry (Porta / Guzik / Piskorski indices) from the
/// Poincare plot of successive RR intervals. Missing with no off-line points.
HraIndices hra_indices(std::span<const double> rr_ms);

/// Throws DataError for fewer than 5 samples.
PhaseSpace rps_embed(std::span<const double> normalized);

/// 400 row-major 20x20 cell occupancies followed by the spatial filling index.
std::array<double, kPhaseSpaceCount> grid_occupancy_and_sfi(const PhaseSpace& ps);

/// Crossing and excursion statistics of the trajectory about the unity line.
std::array<Feature, kPoincareCount> poincare_section_features(const PhaseSpace& ps);

/// Full vector for a baseline-removed record given both detectors' peaks.
FeatureVector extract_feature_vector(const EcgRecord& record, std::span<const std::size_t> peaks_pt,
                                     std::span<const std::size_t> peaks_fd);

/// CSV export: header "id,<names...>", missing rendered as an empty field.
std::string csv_header();
std::string csv_row(const std::string& id, const FeatureVector& v);

/// Parses a CSV produced by csv_header/csv_row (id column first).
struct FeatureTable {
    std::vector<std::string> ids;
    std::vector<FeatureVector> rows;
};
FeatureTable parse_csv(const std::string& text);

}  // namespace ecgaf::features
