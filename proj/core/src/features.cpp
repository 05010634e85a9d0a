#include "ecgaf/features.hpp"

#include "ecgaf/qrs.hpp"
#include "ecgaf/signal.hpp"
#include "ecgaf/sqi.hpp"

#include "fft.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ecgaf::features {

namespace {

struct Band {
    double lo;
    double hi;
    const char* name;
};

constexpr std::array<Band, 9> kBands{{{1, 15, "1_15"},
                                      {15, 30, "15_30"},
                                      {30, 45, "30_45"},
                                      {45, 60, "45_60"},
                                      {60, 75, "60_75"},
                                      {75, 90, "75_90"},
                                      {90, 150, "90_150"},
                                      {5, 14, "5_14"},
                                      {5, 50, "5_50"}}};

constexpr std::array<const char*, kBeatToBeatCount> kRrNames{
    "rr_count", "rr_min", "rr_max", "rr_median", "rr_mean", "rr_sdnn",
    "rr_rmssd", "hr_mean", "hra_pi", "hra_gi", "hra_si"};

constexpr std::array<const char*, kPoincareCount> kPoincareNames{
    "psec_crossings",     "psec_crossings_per_1000", "psec_cross_mean", "psec_cross_sd",
    "psec_cross_min",     "psec_cross_max",          "psec_gap_mean",   "psec_gap_sd",
    "psec_dist_mean",     "psec_dist_max",           "psec_frac_above", "psec_excursion_mean",
    "psec_excursion_sd"};

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_sd(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<FeatureInfo> build_registry() {
    std::vector<FeatureInfo> r;
    r.reserve(kFeatureCount);
    r.push_back({"sqi_template", Category::SignalQuality});
    r.push_back({"sqi_bsqi", Category::SignalQuality});
    for (const Band& b : kBands) {
        r.push_back({std::string("band_median_") + b.name, Category::Frequency});
    }
    r.push_back({"band_ratio_5_14_over_5_50", Category::Frequency});
    for (const char* n : kRrNames) {
        r.push_back({n, Category::BeatToBeat});
    }
    for (std::size_t row = 0; row < kGridSize; ++row) {
        for (std::size_t col = 0; col < kGridSize; ++col) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "rps_cell_%02zu_%02zu", row, col);
            r.push_back({buf, Category::PhaseSpace});
        }
    }
    r.push_back({"rps_sfi", Category::PhaseSpace});
    for (const char* n : kPoincareNames) {
        r.push_back({n, Category::PoincareSection});
    }
    return r;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

}  // namespace

const std::vector<FeatureInfo>& registry() {
    static const std::vector<FeatureInfo> r = build_registry();
    return r;
}

std::pair<std::size_t, std::size_t> category_range(Category c) {
    switch (c) {
        case Category::SignalQuality: return {0, kSignalQualityCount};
        case Category::Frequency: return {kSignalQualityCount, kFrequencyCount};
        case Category::BeatToBeat: return {kSignalQualityCount + kFrequencyCount, kBeatToBeatCount};
        case Category::PhaseSpace:
            return {kSignalQualityCount + kFrequencyCount + kBeatToBeatCount, kPhaseSpaceCount};
        case Category::PoincareSection:
            return {kFeatureCount - kPoincareCount, kPoincareCount};
    }
    throw std::logic_error("unknown feature category");
}

std::array<Feature, kFrequencyCount> band_power_features(std::span<const double> samples, double fs) {
    std::array<Feature, kFrequencyCount> out{};
    const std::size_t n = samples.size();
    if (!(fs > 0.0) || static_cast<double>(n) < fs) {
        return out;
    }
    detail::RealDft dft(n);
    const auto spectrum = dft.forward(samples);
    std::vector<double> power(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        power[k] = std::norm(spectrum[k]) / static_cast<double>(n);
    }
    const double nyquist = fs / 2.0;
    auto freq = [&](std::size_t k) { return static_cast<double>(k) * fs / static_cast<double>(n); };
    auto in_band = [&](double lo, double hi) {
        std::vector<double> vals;
        const double top = std::min(hi, nyquist);
        for (std::size_t k = 0; k < power.size(); ++k) {
            const double f = freq(k);
            if (f >= lo && f <= top) {
                vals.push_back(power[k]);
            }
        }
        return vals;
    };

    for (std::size_t b = 0; b < kBands.size(); ++b) {
        const auto vals = in_band(kBands[b].lo, kBands[b].hi);
        if (!vals.empty()) {
            out[b] = median_of(vals);
        }
    }
    const auto narrow = in_band(5.0, 14.0);
    const auto wide = in_band(5.0, 50.0);
    const double num = std::accumulate(narrow.begin(), narrow.end(), 0.0);
    const double den = std::accumulate(wide.begin(), wide.end(), 0.0);
    if (den >= 1e-12) {
        out[9] = num / den;
    }
    return out;
}

HraIndices hra_indices(std::span<const double> rr_ms) {
    HraIndices h;
    if (rr_ms.size() < 2) {
        return h;
    }
    std::size_t off_line = 0, below = 0;
    double dist_all = 0.0, dist_above = 0.0, angle_all = 0.0, angle_above = 0.0;
    for (std::size_t i = 0; i + 1 < rr_ms.size(); ++i) {
        const double a = rr_ms[i];
        const double b = rr_ms[i + 1];
        if (b == a) {
            continue;
        }
        ++off_line;
        const double dist = std::abs(b - a) / std::numbers::sqrt2;
        const double theta = std::abs(45.0 - std::atan2(b, a) * 180.0 / std::numbers::pi);
        dist_all += dist;
        angle_all += theta;
        if (b > a) {
            dist_above += dist;
            angle_above += theta;
        } else {
            ++below;
        }
    }
    if (off_line == 0) {
        return h;
    }
    h.pi = 100.0 * static_cast<double>(below) / static_cast<double>(off_line);
    h.gi = 100.0 * dist_above / dist_all;
    h.si = angle_all > 0.0 ? Feature(100.0 * angle_above / angle_all) : std::nullopt;
    return h;
}

std::array<Feature, kBeatToBeatCount> rr_statistics(std::span<const double> rr_ms) {
    std::array<Feature, kBeatToBeatCount> out{};
    out[0] = static_cast<double>(rr_ms.size());
    if (rr_ms.empty()) {
        return out;
    }
    const auto [lo, hi] = std::minmax_element(rr_ms.begin(), rr_ms.end());
    const double mean = mean_of(rr_ms);
    out[1] = *lo;
    out[2] = *hi;
    out[3] = median_of({rr_ms.begin(), rr_ms.end()});
    out[4] = mean;
    if (mean > 0.0) {
        out[7] = 60000.0 / mean;
    }
    if (rr_ms.size() >= 2) {
        out[5] = population_sd(rr_ms);
        double ss = 0.0;
        for (std::size_t i = 1; i < rr_ms.size(); ++i) {
            const double d = rr_ms[i] - rr_ms[i - 1];
            ss += d * d;
        }
        out[6] = std::sqrt(ss / static_cast<double>(rr_ms.size() - 1));
        const auto hra = hra_indices(rr_ms);
        out[8] = hra.pi;
        out[9] = hra.gi;
        out[10] = hra.si;
    }
    return out;
}

PhaseSpace rps_embed(std::span<const double> normalized) {
    if (normalized.size() <= kEmbeddingDelay) {
        throw DataError("signal too short for phase-space embedding");
    }
    PhaseSpace ps;
    ps.points.reserve(normalized.size() - kEmbeddingDelay);
    for (std::size_t i = 0; i + kEmbeddingDelay < normalized.size(); ++i) {
        ps.points.emplace_back(normalized[i], normalized[i + kEmbeddingDelay]);
    }
    return ps;
}

std::array<double, kPhaseSpaceCount> grid_occupancy_and_sfi(const PhaseSpace& ps) {
    std::array<double, kPhaseSpaceCount> out{};
    if (ps.points.empty()) {
        throw std::invalid_argument("grid occupancy needs at least one point");
    }
    auto cell = [](double v) {
        const double scaled = std::floor(std::clamp(v, 0.0, 1.0) * static_cast<double>(kGridSize));
        return std::min(static_cast<std::size_t>(scaled), kGridSize - 1);
    };
    std::array<std::size_t, kGridSize * kGridSize> counts{};
    for (const auto& [x, y] : ps.points) {
        ++counts[cell(x) * kGridSize + cell(y)];
    }
    const double total = static_cast<double>(ps.points.size());
    // Sum of squared counts is exact in integers; one final division.
    unsigned long long sum_sq = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = static_cast<double>(counts[i]) / total;
        sum_sq += static_cast<unsigned long long>(counts[i]) * counts[i];
    }
    out[kGridSize * kGridSize] =
        static_cast<double>(sum_sq) / (total * total * static_cast<double>(kGridSize * kGridSize));
    return out;
}

std::array<Feature, kPoincareCount> poincare_section_features(const PhaseSpace& ps) {
    const std::size_t m = ps.points.size();
    if (m < 2) {
        throw std::invalid_argument("Poincare section needs at least two points");
    }
    std::array<Feature, kPoincareCount> out{};
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) {
        d[i] = ps.points[i].second - ps.points[i].first;
    }

    std::vector<double> crossing_u;
    std::vector<std::size_t> crossing_idx;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if ((d[i] > 0.0 && d[i + 1] < 0.0) || (d[i] < 0.0 && d[i + 1] > 0.0)) {
            const auto& p = ps.points[i];
            const auto& q = ps.points[i + 1];
            crossing_u.push_back(0.5 * (0.5 * (p.first + p.second) + 0.5 * (q.first + q.second)));
            crossing_idx.push_back(i);
        }
    }
    out[0] = static_cast<double>(crossing_u.size());
    out[1] = 1000.0 * static_cast<double>(crossing_u.size()) / static_cast<double>(m);
    if (!crossing_u.empty()) {
        out[2] = mean_of(crossing_u);
        out[3] = population_sd(crossing_u);
        out[4] = *std::min_element(crossing_u.begin(), crossing_u.end());
        out[5] = *std::max_element(crossing_u.begin(), crossing_u.end());
    }
    if (crossing_idx.size() >= 2) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < crossing_idx.size(); ++i) {
            gaps.push_back(static_cast<double>(crossing_idx[i] - crossing_idx[i - 1]));
        }
        out[6] = mean_of(gaps);
        out[7] = population_sd(gaps);
    }

    double abs_sum = 0.0, abs_max = 0.0;
    std::size_t above = 0;
    for (double v : d) {
        abs_sum += std::abs(v);
        abs_max = std::max(abs_max, std::abs(v));
        if (v > 0.0) {
            ++above;
        }
    }
    out[8] = abs_sum / static_cast<double>(m);
    out[9] = abs_max;
    out[10] = static_cast<double>(above) / static_cast<double>(m);

    // Excursions: maximal runs of one strict sign; a zero ends the run.
    std::vector<double> amplitudes;
    int run_sign = 0;
    double run_peak = 0.0;
    for (double v : d) {
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s != run_sign) {
            if (run_sign != 0) {
                amplitudes.push_back(run_peak);
            }
            run_sign = s;
            run_peak = 0.0;
        }
        if (s != 0) {
            run_peak = std::max(run_peak, std::abs(v));
        }
    }
    if (run_sign != 0) {
        amplitudes.push_back(run_peak);
    }
    if (!amplitudes.empty()) {
        out[11] = mean_of(amplitudes);
        out[12] = population_sd(amplitudes);
    }
    return out;
}

FeatureVector extract_feature_vector(const EcgRecord& record, std::span<const std::size_t> peaks_pt,
                                     std::span<const std::size_t> peaks_fd) {
    validate(record);
    const double fs = record.sampling_rate;
    FeatureVector v;
    std::size_t at = 0;

    v[at++] = sqi::template_match_sqi(record.samples, fs, peaks_pt);
    v[at++] = sqi::bsqi(peaks_pt, peaks_fd, fs);

    for (const Feature& f : band_power_features(record.samples, fs)) {
        v[at++] = f;
    }
    for (const Feature& f : rr_statistics(qrs::rr_intervals_ms(peaks_pt, fs))) {
        v[at++] = f;
    }
    const PhaseSpace ps = rps_embed(signal::normalize_unit(record.samples));
    for (double f : grid_occupancy_and_sfi(ps)) {
        v[at++] = f;
    }
    for (const Feature& f : poincare_section_features(ps)) {
        v[at++] = f;
    }
    if (at != kFeatureCount) {
        throw std::logic_error("feature registry size mismatch");
    }
    return v;
}

std::string csv_header() {
    std::string h = "id";
    for (const auto& info : registry()) {
        h += ',';
        h += info.name;
    }
    return h;
}

std::string csv_row(const std::string& id, const FeatureVector& v) {
    std::string row = id;
    for (const Feature& f : v.values) {
        row += ',';
        if (f) {
            row += format_double(*f);
        }
    }
    return row;
}

FeatureTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("feature table is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != csv_header()) {
        throw DataError("feature table header does not match the feature registry");
    }
    FeatureTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != kFeatureCount + 1) {
            throw DataError("feature table line " + std::to_string(line_no) + ": expected " +
                            std::to_string(kFeatureCount + 1) + " fields, got " +
                            std::to_string(fields.size()));
        }
        FeatureVector v;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            const std::string& f = fields[i + 1];
            if (f.empty()) {
                continue;
            }
            double value = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
                throw DataError("feature table line " + std::to_string(line_no) +
                                ": invalid number '" + f + "'");
            }
            v[i] = value;
        }
        table.ids.push_back(fields[0]);
        table.rows.push_back(v);
    }
    return table;
}

}  // namespace ecgaf::features
