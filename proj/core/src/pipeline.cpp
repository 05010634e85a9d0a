#include "ecgaf/pipeline.hpp"

#include "ecgaf/qrs.hpp"
#include "ecgaf/signal.hpp"
#include "ecgaf/sqi.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ecgaf::pipeline {

namespace {

constexpr double kModelRate = 300.0;

// Resampled to the model rate and baseline-removed.
EcgRecord condition(const EcgRecord& record) {
    validate(record);
    EcgRecord out;
    out.id = record.id;
    out.label = record.label;
    out.sampling_rate = kModelRate;
    if (record.sampling_rate == kModelRate) {
        out.samples = signal::remove_baseline(record.samples, kModelRate);
    } else {
        const auto resampled = signal::resample_linear(record.samples, record.sampling_rate, kModelRate);
        out.samples = signal::remove_baseline(resampled, kModelRate);
    }
    return out;
}

std::vector<Matrix> segments_for(const EcgRecord& conditioned, std::span<const std::size_t> peaks,
                                 std::size_t width, const spectrogram::StftConfig& stft,
                                 bool* fallback) {
    const auto spec = spectrogram::stft_magnitude(conditioned.samples, conditioned.sampling_rate, stft);
    std::vector<Matrix> out;
    for (auto& seg : spectrogram::extract_segments(spec, peaks, width)) {
        out.push_back(std::move(seg.matrix));
    }
    if (fallback != nullptr) {
        *fallback = out.empty();
    }
    if (out.empty()) {
        if (spec.frames() < width) {
            throw DataError(conditioned.id + ": record too short for a " + std::to_string(width) +
                            "-frame segment");
        }
        out.push_back(spectrogram::segment_at(spec, 0, width).matrix);
    }
    return out;
}

}  // namespace

void PipelineConfig::check() const {
    if (!(sqi_threshold > 0.0 && sqi_threshold < 1.0) ||
        !(prob_diff_threshold > 0.0 && prob_diff_threshold < 1.0)) {
        throw std::invalid_argument("pipeline thresholds must lie in (0, 1)");
    }
    if (!(main_seconds > 0.0) || !(secondary_seconds > 0.0) || secondary_seconds > main_seconds) {
        throw std::invalid_argument("pipeline durations must be positive and ordered");
    }
}

nn::ClassProbabilities DenseNetClassifier::classify(std::span<const Matrix> segments) const {
    return nn::predict(model_, segments);
}

ensemble::Prediction AbstainPostProcessor::decide(const features::FeatureVector& x) const {
    return ensemble::predict_abstain(model_, x);
}

std::string to_string(Branch b) {
    switch (b) {
        case Branch::TooFewPeaks: return "too-few-peaks";
        case Branch::NoiseBySqi: return "noise-by-sqi";
        case Branch::Cnn: return "cnn";
        case Branch::PostProcessed: return "post-processed";
        case Branch::PostAbstained: return "post-abstained";
    }
    return "unknown";
}

Classification classify_record(const EcgRecord& record, const SegmentClassifier& main,
                               const SegmentClassifier& secondary, const PostProcessor& post,
                               const PipelineConfig& cfg) {
    cfg.check();
    validate(record);
    const double duration = record.duration_seconds();
    if (duration < cfg.secondary_seconds) {
        throw DataError(record.id + ": below challenge minimum (" + std::to_string(duration) + " s)");
    }
    const EcgRecord x = condition(record);

    Classification result;
    RoutingTrace& trace = result.trace;
    const auto peaks_pt = qrs::detect_pan_tompkins(x.samples, x.sampling_rate);
    const auto peaks_fd = qrs::detect_filtered_derivative(x.samples, x.sampling_rate);
    trace.pt_peaks = peaks_pt.size();
    trace.fd_peaks = peaks_fd.size();
    if (peaks_pt.size() < cfg.min_peaks) {
        trace.branch = Branch::TooFewPeaks;
        result.label = RhythmLabel::Noisy;
        return result;
    }

    trace.sqi = sqi::template_match_sqi(x.samples, x.sampling_rate, peaks_pt);
    if (!trace.sqi || *trace.sqi <= cfg.sqi_threshold) {
        trace.branch = Branch::NoiseBySqi;
        result.label = RhythmLabel::Noisy;
        return result;
    }

    const bool use_main = duration >= cfg.main_seconds;
    const SegmentClassifier& model = use_main ? main : secondary;
    trace.model = use_main ? nn::ModelKind::Main : nn::ModelKind::Secondary;
    const auto segments =
        segments_for(x, peaks_pt, model.segment_width(), cfg.stft, &trace.fallback_segment);
    trace.segments = segments.size();
    trace.cnn_invoked = true;
    const nn::ClassProbabilities probs = model.classify(segments);
    result.probabilities = probs;
    result.label = kAllLabels[nn::argmax(probs)];
    trace.cnn_label = result.label;
    trace.branch = Branch::Cnn;

    const double p_n = probs[label_index(RhythmLabel::Normal)];
    const double p_o = probs[label_index(RhythmLabel::Other)];
    const bool nsr_or_other = result.label == RhythmLabel::Normal || result.label == RhythmLabel::Other;
    if (nsr_or_other && std::abs(p_n - p_o) < cfg.prob_diff_threshold) {
        trace.post_invoked = true;
        const auto verdict = post.decide(features::extract_feature_vector(x, peaks_pt, peaks_fd)).verdict;
        trace.post_verdict = verdict;
        if (verdict == ensemble::Verdict::Abstain) {
            trace.branch = Branch::PostAbstained;
        } else {
            trace.branch = Branch::PostProcessed;
            result.label = verdict == ensemble::Verdict::NSR ? RhythmLabel::Normal : RhythmLabel::Other;
        }
    }
    return result;
}

std::vector<Matrix> record_segments(const EcgRecord& record, std::size_t width,
                                    const spectrogram::StftConfig& stft) {
    const EcgRecord x = condition(record);
    const auto peaks = qrs::detect_pan_tompkins(x.samples, x.sampling_rate);
    return segments_for(x, peaks, width, stft, nullptr);
}

features::FeatureVector record_features(const EcgRecord& record) {
    const EcgRecord x = condition(record);
    const auto pt = qrs::detect_pan_tompkins(x.samples, x.sampling_rate);
    const auto fd = qrs::detect_filtered_derivative(x.samples, x.sampling_rate);
    return features::extract_feature_vector(x, pt, fd);
}

Feature challenge_mean(std::span<const Feature> per_class) {
    double sum = 0.0;
    std::size_t present = 0;
    for (const Feature& f : per_class) {
        if (f) {
            sum += *f;
            ++present;
        }
    }
    if (present == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(present);
}

F1Report evaluate_f1(std::span<const RhythmLabel> predicted, std::span<const RhythmLabel> truth) {
    if (predicted.size() != truth.size() || predicted.empty()) {
        throw std::invalid_argument("evaluate_f1: lists must be non-empty and of equal length");
    }
    F1Report report;
    constexpr std::array<RhythmLabel, 3> scored{RhythmLabel::Normal, RhythmLabel::AF, RhythmLabel::Other};
    for (std::size_t c = 0; c < scored.size(); ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool p = predicted[i] == scored[c];
            const bool t = truth[i] == scored[c];
            tp += p && t;
            fp += p && !t;
            fn += !p && t;
        }
        if (tp + fp + fn == 0) {
            report.warnings.push_back(std::string("class ") + label_to_char(scored[c]) +
                                      " absent from predictions and truth; F1 excluded from mean");
            continue;
        }
        report.per_class[c] = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
    report.mean = challenge_mean(report.per_class);
    return report;
}

std::vector<std::size_t> stratified_kfold(std::span<const RhythmLabel> labels, std::size_t k,
                                          std::uint64_t seed) {
    if (k < 2) {
        throw std::invalid_argument("stratified_kfold: k must be at least 2");
    }
    std::vector<std::size_t> fold(labels.size(), 0);
    std::mt19937_64 rng(seed);
    for (RhythmLabel cls : kAllLabels) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) {
                members.push_back(i);
            }
        }
        if (members.empty()) {
            continue;
        }
        if (members.size() < k) {
            throw DataError(std::string("class ") + label_to_char(cls) + " has " +
                            std::to_string(members.size()) + " records, fewer than k = " +
                            std::to_string(k));
        }
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[rng() % i]);
        }
        for (std::size_t j = 0; j < members.size(); ++j) {
            fold[members[j]] = j % k;
        }
    }
    return fold;
}

}  // namespace ecgaf::pipeline
