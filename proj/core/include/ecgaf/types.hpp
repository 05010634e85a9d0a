#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecgaf {

/// Raised for malformed or physically invalid input data (as opposed to
/// programming errors, which use std::invalid_argument / std::logic_error).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The four challenge classes, in model-output order.
enum class RhythmLabel { Normal = 0, AF = 1, Other = 2, Noisy = 3 };

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<RhythmLabel, kNumClasses> kAllLabels{
    RhythmLabel::Normal, RhythmLabel::AF, RhythmLabel::Other, RhythmLabel::Noisy};

char label_to_char(RhythmLabel label);
RhythmLabel label_from_char(char c);
RhythmLabel label_from_string(std::string_view s);

/// Index into a class-probability vector.
constexpr std::size_t label_index(RhythmLabel label) { return static_cast<std::size_t>(label); }

/// A single-lead recording. Samples are in millivolts.
struct EcgRecord {
    std::string id;
    double sampling_rate = 300.0;
    std::vector<double> samples;
    std::optional<RhythmLabel> label;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sampling_rate;
    }
};

/// Throws DataError unless fs > 0, the record is non-empty and every sample is finite.
void validate(const EcgRecord& record);

/// A real-valued feature that may be absent.
using Feature = std::optional<double>;

/// Dense row-major real matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

}  // namespace ecgaf
