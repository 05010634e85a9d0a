#include "ecgaf/nn/gradcheck.hpp"

#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/nn/layers.hpp"
#include "ecgaf/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace ecgaf::nn {

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(shape);
    for (double& v : t.values()) {
        v = dist(rng);
    }
    return t;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

struct Accumulator {
    GradCheckReport report;

    void check(Tensor& values, const Tensor& analytic, const std::function<double()>& loss) {
        report.max_relative_error = std::max(
            report.max_relative_error, max_relative_error(values.values(), analytic.values(), loss));
        report.values_checked += values.size();
    }
};

}  // namespace

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
    return std::abs(analytic - numeric) / denom;
}

double max_relative_error(std::span<double> values, std::span<const double> analytic,
                          const std::function<double()>& loss, double step) {
    if (values.size() != analytic.size()) {
        throw std::invalid_argument("gradient check: size mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + step;
        const double up = loss();
        values[i] = saved - step;
        const double down = loss();
        values[i] = saved;
        worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * step)));
    }
    return worst;
}

std::string to_string(GradCheckTarget target) {
    switch (target) {
        case GradCheckTarget::Conv2d: return "conv2d";
        case GradCheckTarget::RowBatchNorm: return "rowwise_batchnorm";
        case GradCheckTarget::DenseBlock: return "dense_block";
        case GradCheckTarget::AvgPool: return "avg_pool2x2";
        case GradCheckTarget::GlobalAvgPool: return "global_avg_pool";
        case GradCheckTarget::Affine: return "affine";
        case GradCheckTarget::SoftmaxCrossEntropy: return "softmax_cross_entropy";
        case GradCheckTarget::Model: return "densenet_reduced";
    }
    return "unknown";
}

GradCheckReport gradient_check(GradCheckTarget target, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Accumulator acc{GradCheckReport{target, 0.0, 0}};

    switch (target) {
        case GradCheckTarget::Conv2d: {
            Tensor x = random_tensor(Shape{2, 3, 6, 7}, rng);
            Tensor w = random_tensor(Shape{4, 3, 3, 3}, rng);
            Tensor b = random_tensor(Shape{1, 4, 1, 1}, rng);
            const Tensor proj = random_tensor(Shape{2, 4, 6, 7}, rng);
            auto loss = [&] { return dot(conv2d(x, w, b, 1, 1), proj); };
            const auto g = conv2d_backward(x, w, proj, 1, 1);
            acc.check(x, g.input, loss);
            acc.check(w, g.weight, loss);
            acc.check(b, g.bias, loss);
            break;
        }
        case GradCheckTarget::RowBatchNorm: {
            Tensor x = random_tensor(Shape{2, 2, 4, 5}, rng, -2.0, 2.0);
            Tensor gamma = random_tensor(Shape{1, 2, 4, 1}, rng, 0.5, 1.5);
            Tensor beta = random_tensor(Shape{1, 2, 4, 1}, rng, -0.5, 0.5);
            Tensor rm(Shape{1, 2, 4, 1}, 0.0), rv(Shape{1, 2, 4, 1}, 1.0);
            const Tensor proj = random_tensor(x.shape(), rng);
            auto loss = [&] {
                return dot(rowwise_batchnorm(x, gamma, beta, Mode::Train, rm, rv, nullptr), proj);
            };
            BatchNormCache cache;
            rowwise_batchnorm(x, gamma, beta, Mode::Train, rm, rv, &cache);
            const auto g = rowwise_batchnorm_backward(cache, gamma, proj);
            acc.check(x, g.input, loss);
            acc.check(gamma, g.gamma, loss);
            acc.check(beta, g.beta, loss);
            break;
        }
        case GradCheckTarget::DenseBlock: {
            DenseBlock block("gc", 3, 4, 3, 2, rng);
            Tensor x = random_tensor(Shape{2, 3, 4, 5}, rng);
            const Tensor proj = random_tensor(Shape{2, block.out_channels(), 4, 5}, rng);
            auto loss = [&] { return dot(block.forward(x, Mode::Train), proj); };
            std::vector<Parameter*> params;
            std::vector<Buffer> buffers;
            block.collect(params, buffers);
            for (Parameter* p : params) {
                p->grad.fill(0.0);
            }
            block.forward(x, Mode::Train);
            const Tensor dx = block.backward(proj);
            acc.check(x, dx, loss);
            for (Parameter* p : params) {
                const Tensor analytic = p->grad;
                acc.check(p->value, analytic, loss);
            }
            break;
        }
        case GradCheckTarget::AvgPool: {
            Tensor x = random_tensor(Shape{2, 2, 5, 7}, rng);
            const Tensor proj = random_tensor(Shape{2, 2, 2, 3}, rng);
            auto loss = [&] { return dot(avg_pool2x2(x), proj); };
            acc.check(x, avg_pool2x2_backward(x.shape(), proj), loss);
            break;
        }
        case GradCheckTarget::GlobalAvgPool: {
            Tensor x = random_tensor(Shape{2, 3, 4, 5}, rng);
            const Tensor proj = random_tensor(Shape{2, 3, 1, 1}, rng);
            auto loss = [&] { return dot(global_avg_pool(x), proj); };
            acc.check(x, global_avg_pool_backward(x.shape(), proj), loss);
            break;
        }
        case GradCheckTarget::Affine: {
            Tensor x = random_tensor(Shape{3, 5, 1, 1}, rng);
            Tensor w = random_tensor(Shape{4, 5, 1, 1}, rng);
            Tensor b = random_tensor(Shape{1, 4, 1, 1}, rng);
            const Tensor proj = random_tensor(Shape{3, 4, 1, 1}, rng);
            auto loss = [&] { return dot(affine(x, w, b), proj); };
            const auto g = affine_backward(x, w, proj);
            acc.check(x, g.input, loss);
            acc.check(w, g.weight, loss);
            acc.check(b, g.bias, loss);
            break;
        }
        case GradCheckTarget::SoftmaxCrossEntropy: {
            Tensor logits = random_tensor(Shape{3, 4, 1, 1}, rng, -3.0, 3.0);
            std::vector<std::size_t> labels(3);
            for (auto& l : labels) {
                l = rng() % 4;
            }
            auto loss = [&] { return softmax_cross_entropy(logits, labels).loss; };
            const auto r = softmax_cross_entropy(logits, labels);
            acc.check(logits, r.grad_logits, loss);
            break;
        }
        case GradCheckTarget::Model: {
            ModelConfig cfg;
            cfg.growth_rate = 2;
            cfg.layers_per_block = 2;
            cfg.blocks = 3;
            cfg.input_rows = 8;
            cfg.input_cols = 8;
            cfg.stem_channels = 4;
            DenseNet model(cfg, rng());
            Tensor x = random_tensor(Shape{3, 1, 8, 8}, rng);
            std::vector<std::size_t> labels{0, 1, 2};
            auto loss = [&] { return softmax_cross_entropy(model.forward(x, Mode::Train), labels).loss; };
            model.zero_grad();
            const auto r = softmax_cross_entropy(model.forward(x, Mode::Train), labels);
            const Tensor dx = model.backward(r.grad_logits);
            acc.check(x, dx, loss);
            for (Parameter* p : model.parameters()) {
                const Tensor analytic = p->grad;
                acc.check(p->value, analytic, loss);
            }
            break;
        }
    }
    return acc.report;
}

}  // namespace ecgaf::nn
