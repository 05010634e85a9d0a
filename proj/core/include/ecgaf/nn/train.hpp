#pragma once

#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ecgaf::nn {

/// Per-class probabilities in {N, A, O, ~} order.
using ClassProbabilities = std::array<double, kNumClasses>;

struct LabeledSegment {
    Matrix matrix;      // rows x cols spectrogram block
    std::size_t label;  // class index
};

inline constexpr std::size_t kMaxEpochs = 15;

struct TrainConfig {
    std::size_t epochs = kMaxEpochs;  // 1..15
    std::size_t batch_size = 16;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::size_t lr_decay_epoch = 10;  // lr *= lr_decay from this (0-based) epoch on
    double lr_decay = 0.1;
    std::uint64_t seed = 0;
    /// Donor whose parameters and running statistics initialize the model.
    const DenseNet* warm_start = nullptr;
    /// Evaluate eval-mode accuracy on the full training set after each epoch.
    bool evaluate_each_epoch = true;
};

struct EpochLog {
    std::size_t epoch = 0;
    std::size_t steps = 0;          // cumulative optimizer steps
    double learning_rate = 0.0;
    double mean_loss = 0.0;         // mean mini-batch loss (train mode)
    double batch_accuracy = 0.0;    // accuracy of train-mode predictions seen during the epoch
    double eval_accuracy = -1.0;    // eval-mode accuracy on the full set, -1 if not evaluated
};

struct TrainResult {
    std::vector<EpochLog> epochs;
    std::size_t steps = 0;
};

/// Mini-batch SGD with momentum on softmax cross-entropy. Deterministic for a
/// given seed: the shuffle order derives only from `config.seed`.
TrainResult train(DenseNet& model, std::span<const LabeledSegment> data, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Packs matrices into a (n, 1, rows, cols) tensor.
Tensor make_batch(std::span<const Matrix* const> items);

/// Eval-mode softmax of one segment.
ClassProbabilities segment_probabilities(const DenseNet& model, const Matrix& segment);

/// Record-level probabilities: the mean of per-segment softmax outputs.
/// Throws std::invalid_argument on an empty list.
ClassProbabilities predict(const DenseNet& model, std::span<const Matrix> segments);

/// Fraction of segments whose eval-mode argmax equals the label.
double accuracy(const DenseNet& model, std::span<const LabeledSegment> data);

std::size_t argmax(const ClassProbabilities& p);

}  // namespace ecgaf::nn
