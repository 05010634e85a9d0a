#include "ecgaf/types.hpp"

#include <cmath>

namespace ecgaf {

char label_to_char(RhythmLabel label) {
    switch (label) {
        case RhythmLabel::Normal: return 'N';
        case RhythmLabel::AF: return 'A';
        case RhythmLabel::Other: return 'O';
        case RhythmLabel::Noisy: return '~';
    }
    throw std::logic_error("unknown rhythm label");
}

RhythmLabel label_from_char(char c) {
    switch (c) {
        case 'N': return RhythmLabel::Normal;
        case 'A': return RhythmLabel::AF;
        case 'O': return RhythmLabel::Other;
        case '~': return RhythmLabel::Noisy;
        default: break;
    }
    throw DataError(std::string("invalid rhythm label '") + c + "'");
}

RhythmLabel label_from_string(std::string_view s) {
    if (s.size() != 1) {
        throw DataError("invalid rhythm label '" + std::string(s) + "'");
    }
    return label_from_char(s.front());
}

void validate(const EcgRecord& record) {
    if (!(record.sampling_rate > 0.0) || !std::isfinite(record.sampling_rate)) {
        throw DataError("invalid sampling rate for record '" + record.id + "'");
    }
    if (record.samples.empty()) {
        throw DataError("empty record '" + record.id + "'");
    }
    for (double v : record.samples) {
        if (!std::isfinite(v)) {
            throw DataError("invalid signal");
        }
    }
}

}  // namespace ecgaf
