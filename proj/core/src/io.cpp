#include "ecgaf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace ecgaf::io {

namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(const std::string& token, T& out) {
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

}  // namespace

fs::path data_path_for(const fs::path& header_path) {
    fs::path p = header_path;
    p.replace_extension(".dat");
    return p;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

EcgRecord read_record(const fs::path& header_path) {
    std::istringstream header(read_text(header_path));
    std::vector<std::string> tokens{std::istream_iterator<std::string>(header),
                                    std::istream_iterator<std::string>()};
    if (tokens.size() != 4) {
        throw DataError(header_path.string() + ": malformed header (expected '<id> <fs> <n> <gain>')");
    }
    EcgRecord record;
    record.id = tokens[0];
    std::size_t n = 0;
    double gain = 0.0;
    if (!parse_number(tokens[1], record.sampling_rate) || !(record.sampling_rate > 0.0) ||
        !std::isfinite(record.sampling_rate)) {
        throw DataError(header_path.string() + ": malformed header (sampling rate)");
    }
    if (!parse_number(tokens[2], n)) {
        throw DataError(header_path.string() + ": malformed header (sample count)");
    }
    if (!parse_number(tokens[3], gain) || !(gain > 0.0) || !std::isfinite(gain)) {
        throw DataError(header_path.string() + ": bad gain '" + tokens[3] + "'");
    }

    const std::string raw = read_text(data_path_for(header_path));
    if (raw.size() != 2 * n) {
        throw DataError(header_path.string() + ": length mismatch (header " + std::to_string(n) +
                        " samples, data " + std::to_string(raw.size() / 2) + ")");
    }
    record.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto lo = static_cast<std::uint16_t>(static_cast<unsigned char>(raw[2 * i]));
        const auto hi = static_cast<std::uint16_t>(static_cast<unsigned char>(raw[2 * i + 1]));
        const auto value = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        record.samples[i] = static_cast<double>(value) / gain;
    }
    return record;
}

void write_record(const EcgRecord& record, const fs::path& header_path, double gain) {
    if (!(gain > 0.0) || !std::isfinite(gain)) {
        throw std::invalid_argument("write_record: gain must be positive");
    }
    if (record.id.empty() || record.id.find_first_of(" \t\r\n") != std::string::npos) {
        throw DataError("record id must be a non-empty token");
    }
    std::string raw(2 * record.samples.size(), '\0');
    for (std::size_t i = 0; i < record.samples.size(); ++i) {
        const double scaled = std::round(record.samples[i] * gain);
        if (!(scaled >= -32768.0 && scaled <= 32767.0)) {
            throw DataError("sample " + std::to_string(i) + " of " + record.id +
                            " does not fit in 16 bits at gain " + shortest(gain));
        }
        const auto bits = static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled));
        raw[2 * i] = static_cast<char>(bits & 0xFF);
        raw[2 * i + 1] = static_cast<char>(bits >> 8);
    }
    write_text(raw, data_path_for(header_path));
    write_text(record.id + ' ' + shortest(record.sampling_rate) + ' ' +
                   std::to_string(record.samples.size()) + ' ' + shortest(gain) + '\n',
               header_path);
}

std::vector<fs::path> list_records(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw DataError(dir.string() + " is not a directory");
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".hea") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

LabelTable read_labels(const fs::path& path) {
    std::istringstream in(read_text(path));
    LabelTable table;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected '<id>,<label>'");
        }
        const std::string id = trim(line.substr(0, comma));
        const std::string label = trim(line.substr(comma + 1));
        RhythmLabel parsed;
        try {
            parsed = label_from_string(label);
        } catch (const std::exception&) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": invalid label '" + label + "'");
        }
        if (!seen.insert(id).second) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
        }
        table.emplace_back(id, parsed);
    }
    return table;
}

std::string format_labels(const LabelTable& labels) {
    std::string out;
    for (const auto& [id, label] : labels) {
        out += id;
        out += ',';
        out += label_to_char(label);
        out += '\n';
    }
    return out;
}

void write_labels(const LabelTable& labels, const fs::path& path) {
    write_text(format_labels(labels), path);
}

std::vector<std::size_t> read_peaks(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<std::size_t> peaks;
    std::string token;
    while (in >> token) {
        std::size_t v = 0;
        if (!parse_number(token, v)) {
            throw DataError(path.string() + ": invalid peak index '" + token + "'");
        }
        peaks.push_back(v);
    }
    return peaks;
}

void write_peaks(const std::vector<std::size_t>& peaks, const fs::path& path) {
    std::string out;
    for (std::size_t p : peaks) {
        out += std::to_string(p);
        out += '\n';
    }
    write_text(out, path);
}

}  // namespace ecgaf::io
