#pragma once

#include "ecgaf/ensemble.hpp"
#include "ecgaf/features.hpp"
#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/nn/train.hpp"
#include "ecgaf/pipeline.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ecgaf::testing {

/// Returns fixed probabilities and counts how often it was asked.
class StubClassifier final : public pipeline::SegmentClassifier {
public:
    StubClassifier(std::size_t width, nn::ClassProbabilities p) : width_(width), p_(p) {}
    std::size_t segment_width() const override { return width_; }
    nn::ClassProbabilities classify(std::span<const Matrix> segments) const override {
        ++calls;
        last_segments = segments.size();
        return p_;
    }
    mutable int calls = 0;
    mutable std::size_t last_segments = 0;

private:
    std::size_t width_;
    nn::ClassProbabilities p_;
};

class StubPost final : public pipeline::PostProcessor {
public:
    explicit StubPost(ensemble::Verdict v) : verdict_(v) {}
    ensemble::Prediction decide(const features::FeatureVector& x) const override {
        ++calls;
        last_size = x.size();
        return {verdict_, verdict_ == ensemble::Verdict::NSR ? 1.0 : (verdict_ == ensemble::Verdict::Other ? -1.0 : 0.0)};
    }
    mutable int calls = 0;
    mutable std::size_t last_size = 0;

private:
    ensemble::Verdict verdict_;
};

/// Small DenseNet (k = 4, L = 4) used for overfitting tests.
inline nn::ModelConfig reduced_config(std::size_t cols = 225) {
    nn::ModelConfig cfg;
    cfg.growth_rate = 4;
    cfg.layers_per_block = 4;
    cfg.blocks = 3;
    cfg.input_rows = 20;
    cfg.input_cols = cols;
    cfg.stem_channels = 8;
    return cfg;
}

/// Four classes of 20 x cols blocks; class c is uniform noise plus a constant
/// stripe on frequency row 3c.
inline std::vector<nn::LabeledSegment> separable_spectrograms(std::size_t per_class, std::size_t cols,
                                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(0.0, 0.3);
    std::vector<nn::LabeledSegment> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
            Matrix m(20, cols);
            for (std::size_t r = 0; r < 20; ++r) {
                for (std::size_t t = 0; t < cols; ++t) {
                    m(r, t) = noise(rng) + (r == 3 * c ? 1.0 : 0.0);
                }
            }
            out.push_back({std::move(m), c});
        }
    }
    return out;
}

/// Feature 0 > 0 marks NSR and feature 1 is a monotone copy of it; every
/// other feature is missing.
struct SeparableFeatures {
    std::vector<features::FeatureVector> x;
    std::vector<RhythmLabel> y;
};

inline SeparableFeatures separable_features(std::size_t n, double missing_fraction, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.1, 2.0);
    SeparableFeatures d;
    const auto missing = static_cast<std::size_t>(missing_fraction * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const bool nsr = i % 2 == 0;
        const double v = nsr ? mag(rng) : -mag(rng);
        features::FeatureVector fv;
        // Disjoint missing sets: feature 0 drops the first block, feature 1 the last.
        if (i >= missing) {
            fv[0] = v;
        }
        if (i < n - missing) {
            fv[1] = 3.0 * v + 1.0;
        }
        d.x.push_back(fv);
        d.y.push_back(nsr ? RhythmLabel::Normal : RhythmLabel::Other);
    }
    return d;
}

}  // namespace ecgaf::testing
