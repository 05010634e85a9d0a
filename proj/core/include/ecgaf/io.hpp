#pragma once

#include "ecgaf/types.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

/// Record, label and annotation files.
///
/// A record is a text header `<stem>.hea` holding "<id> <fs> <n> <gain>" and a
/// companion `<stem>.dat` of n little-endian int16 samples (millivolts = raw / gain).
namespace ecgaf::io {

inline constexpr double kDefaultGain = 1000.0;

std::filesystem::path data_path_for(const std::filesystem::path& header_path);

EcgRecord read_record(const std::filesystem::path& header_path);

/// Quantizes to int16 at `gain` counts per mV; throws DataError if a sample
/// does not fit.
void write_record(const EcgRecord& record, const std::filesystem::path& header_path,
                  double gain = kDefaultGain);

/// Header paths (`*.hea`) in a directory, sorted by file name.
std::vector<std::filesystem::path> list_records(const std::filesystem::path& dir);

/// "<id>,<label>" lines; ids must be unique.
using LabelTable = std::vector<std::pair<std::string, RhythmLabel>>;
LabelTable read_labels(const std::filesystem::path& path);
void write_labels(const LabelTable& labels, const std::filesystem::path& path);
std::string format_labels(const LabelTable& labels);

/// One sample index per line.
std::vector<std::size_t> read_peaks(const std::filesystem::path& path);
void write_peaks(const std::vector<std::size_t>& peaks, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace ecgaf::io
