#pragma once

#include "ecgaf/ensemble.hpp"
#include "ecgaf/features.hpp"
#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/nn/train.hpp"
#include "ecgaf/spectrogram.hpp"
#include "ecgaf/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecgaf::pipeline {

struct PipelineConfig {
    double sqi_threshold = 0.5;        // gate passes only when SQI > threshold
    double prob_diff_threshold = 0.4;  // post-process when |p_N - p_O| < threshold
    double main_seconds = 15.0;
    double secondary_seconds = 9.0;
    std::size_t min_peaks = 2;
    spectrogram::StftConfig stft;

    /// Throws std::invalid_argument on out-of-range values.
    void check() const;
};

/// Record-level class probabilities from a set of spectrogram segments.
class SegmentClassifier {
public:
    virtual ~SegmentClassifier() = default;
    virtual std::size_t segment_width() const = 0;
    virtual nn::ClassProbabilities classify(std::span<const Matrix> segments) const = 0;
};

class DenseNetClassifier final : public SegmentClassifier {
public:
    explicit DenseNetClassifier(const nn::DenseNet& model) : model_(model) {}
    std::size_t segment_width() const override { return model_.config().input_cols; }
    nn::ClassProbabilities classify(std::span<const Matrix> segments) const override;

private:
    const nn::DenseNet& model_;
};

/// NSR-vs-Other arbiter over the hand-crafted feature vector.
class PostProcessor {
public:
    virtual ~PostProcessor() = default;
    virtual ensemble::Prediction decide(const features::FeatureVector& x) const = 0;
};

class AbstainPostProcessor final : public PostProcessor {
public:
    explicit AbstainPostProcessor(const ensemble::AbstainModel& model) : model_(model) {}
    ensemble::Prediction decide(const features::FeatureVector& x) const override;

private:
    const ensemble::AbstainModel& model_;
};

enum class Branch {
    TooFewPeaks,    // '~' before the SQI is computed
    NoiseBySqi,     // '~' from the quality gate
    Cnn,            // CNN label, no post-processing
    PostProcessed,  // post-processor overrode or confirmed the label
    PostAbstained,  // post-processor abstained, CNN label kept
};

std::string to_string(Branch b);

struct RoutingTrace {
    Branch branch = Branch::Cnn;
    std::size_t pt_peaks = 0;
    std::size_t fd_peaks = 0;
    Feature sqi;
    std::optional<nn::ModelKind> model;
    bool cnn_invoked = false;
    std::size_t segments = 0;
    bool fallback_segment = false;
    std::optional<RhythmLabel> cnn_label;
    bool post_invoked = false;
    std::optional<ensemble::Verdict> post_verdict;
};

struct Classification {
    RhythmLabel label = RhythmLabel::Noisy;
    std::optional<nn::ClassProbabilities> probabilities;
    RoutingTrace trace;
};

/// Full decision path for one record: conditioning, QRS detection, quality
/// gate, spectrogram CNN and NSR/O post-processing. Throws DataError
/// "below challenge minimum" for records shorter than cfg.secondary_seconds.
Classification classify_record(const EcgRecord& record, const SegmentClassifier& main,
                               const SegmentClassifier& secondary, const PostProcessor& post,
                               const PipelineConfig& cfg = {});

/// Spectrogram segments of the given width for a raw record, anchored at the
/// Pan-Tompkins peaks, falling back to the frame-0 segment when none fit.
std::vector<Matrix> record_segments(const EcgRecord& record, std::size_t width,
                                    const spectrogram::StftConfig& stft = {});

/// Feature vector of a raw record (baseline removal and both detectors applied).
features::FeatureVector record_features(const EcgRecord& record);

struct F1Report {
    std::array<Feature, 3> per_class;  // N, A, O
    Feature mean;
    std::vector<std::string> warnings;
};

/// Mean of the present per-class scores; missing when none are present.
Feature challenge_mean(std::span<const Feature> per_class);

/// Per-class 2TP / (2TP + FP + FN) for N, A and O. A class absent from both
/// lists scores missing and is excluded from the mean with a warning.
F1Report evaluate_f1(std::span<const RhythmLabel> predicted, std::span<const RhythmLabel> truth);

/// Fold index per record: each class is shuffled with `seed` and dealt
/// round-robin starting at fold 0. DataError if a present class has fewer
/// than k members.
std::vector<std::size_t> stratified_kfold(std::span<const RhythmLabel> labels, std::size_t k,
                                          std::uint64_t seed);

}  // namespace ecgaf::pipeline
