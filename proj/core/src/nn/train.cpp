#include "ecgaf/nn/train.hpp"

#include "ecgaf/nn/ops.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ecgaf::nn {

Tensor make_batch(std::span<const Matrix* const> items) {
    if (items.empty()) {
        throw std::invalid_argument("empty batch");
    }
    const std::size_t rows = items.front()->rows;
    const std::size_t cols = items.front()->cols;
    Tensor batch(Shape{items.size(), 1, rows, cols});
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i]->rows != rows || items[i]->cols != cols) {
            throw std::invalid_argument("batch items differ in shape");
        }
        std::copy(items[i]->data.begin(), items[i]->data.end(), batch.data() + i * rows * cols);
    }
    return batch;
}

std::size_t argmax(const ClassProbabilities& p) {
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

ClassProbabilities segment_probabilities(const DenseNet& model, const Matrix& segment) {
    const Matrix* items[] = {&segment};
    const Tensor probs = softmax(model.infer(make_batch(items)));
    ClassProbabilities out{};
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = probs[k];
    }
    return out;
}

ClassProbabilities predict(const DenseNet& model, std::span<const Matrix> segments) {
    if (segments.empty()) {
        throw std::invalid_argument("predict: no segments");
    }
    ClassProbabilities mean{};
    for (const Matrix& seg : segments) {
        const auto p = segment_probabilities(model, seg);
        for (std::size_t k = 0; k < mean.size(); ++k) {
            mean[k] += p[k];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(segments.size());
    }
    return mean;
}

double accuracy(const DenseNet& model, std::span<const LabeledSegment> data) {
    if (data.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (const auto& item : data) {
        if (argmax(segment_probabilities(model, item.matrix)) == item.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(DenseNet& model, std::span<const LabeledSegment> data, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
    if (data.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    if (config.epochs == 0 || config.epochs > kMaxEpochs) {
        throw std::invalid_argument("train: epochs must be in [1, 15]");
    }
    if (config.batch_size == 0) {
        throw std::invalid_argument("train: batch size must be positive");
    }
    const ModelConfig& mc = model.config();
    for (const auto& item : data) {
        if (item.matrix.rows != mc.input_rows || item.matrix.cols != mc.input_cols) {
            throw std::invalid_argument("train: segment shape does not match model input");
        }
        if (item.label >= mc.num_classes) {
            throw std::invalid_argument("train: label out of range");
        }
    }
    if (config.warm_start != nullptr) {
        model.copy_state_from(*config.warm_start);
    }

    auto params = model.parameters();
    std::vector<Tensor> velocity;
    velocity.reserve(params.size());
    for (const Parameter* p : params) {
        velocity.emplace_back(p->value.shape());
    }

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = epoch >= config.lr_decay_epoch ? config.learning_rate * config.lr_decay
                                                         : config.learning_rate;
        // Fisher-Yates with an explicit draw keeps the order independent of
        // the standard library's shuffle implementation.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng() % i]);
        }

        EpochLog log;
        log.epoch = epoch;
        log.learning_rate = lr;
        double loss_sum = 0.0;
        std::size_t batches = 0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const Matrix*> items;
            std::vector<std::size_t> labels;
            for (std::size_t i = start; i < end; ++i) {
                items.push_back(&data[order[i]].matrix);
                labels.push_back(data[order[i]].label);
            }
            model.zero_grad();
            const Tensor logits = model.forward(make_batch(items), Mode::Train);
            const auto loss = softmax_cross_entropy(logits, labels);
            model.backward(loss.grad_logits);

            for (std::size_t p = 0; p < params.size(); ++p) {
                auto v = velocity[p].values();
                auto w = params[p]->value.values();
                auto g = params[p]->grad.values();
                for (std::size_t i = 0; i < v.size(); ++i) {
                    v[i] = config.momentum * v[i] - lr * g[i];
                    w[i] += v[i];
                }
            }

            const std::size_t k = mc.num_classes;
            for (std::size_t b = 0; b < labels.size(); ++b) {
                const double* row = loss.probabilities.data() + b * k;
                if (static_cast<std::size_t>(std::max_element(row, row + k) - row) == labels[b]) {
                    ++correct;
                }
            }
            loss_sum += loss.loss;
            ++batches;
            ++result.steps;
        }
        log.steps = result.steps;
        log.mean_loss = loss_sum / static_cast<double>(batches);
        log.batch_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
        if (config.evaluate_each_epoch) {
            log.eval_accuracy = accuracy(model, data);
        }
        result.epochs.push_back(log);
        if (on_epoch) {
            on_epoch(log);
        }
    }
    return result;
}

}  // namespace ecgaf::nn
