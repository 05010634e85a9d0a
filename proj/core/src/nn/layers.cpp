#include "ecgaf/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecgaf::nn {

namespace {

Tensor he_normal(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Tensor t(shape);
    for (double& v : t.values()) {
        v = dist(rng);
    }
    return t;
}

}  // namespace

// --- Conv2dLayer -------------------------------------------------------------

Conv2dLayer::Conv2dLayer(std::string name, std::size_t in_channels, std::size_t out_channels,
                         std::size_t kernel, std::mt19937_64& rng)
    : weight_(name + ".weight", he_normal(Shape{out_channels, in_channels, kernel, kernel},
                                          in_channels * kernel * kernel, rng)),
      bias_(name + ".bias", Tensor(Shape{1, out_channels, 1, 1})),
      padding_(kernel / 2) {}

Tensor Conv2dLayer::forward(const Tensor& x, Mode /*mode*/) {
    input_ = x;
    return conv2d(x, weight_.value, bias_.value, 1, padding_);
}

Tensor Conv2dLayer::backward(const Tensor& grad_output) {
    auto g = conv2d_backward(input_, weight_.value, grad_output, 1, padding_);
    weight_.grad.add(g.weight);
    bias_.grad.add(g.bias);
    return std::move(g.input);
}

Tensor Conv2dLayer::infer(const Tensor& x) const {
    return conv2d(x, weight_.value, bias_.value, 1, padding_);
}

void Conv2dLayer::collect(std::vector<Parameter*>& params, std::vector<Buffer>& /*buffers*/) {
    params.push_back(&weight_);
    params.push_back(&bias_);
}

// --- RowBatchNormLayer ---------------------------------------------------------

RowBatchNormLayer::RowBatchNormLayer(std::string name, std::size_t channels, std::size_t rows)
    : name_(std::move(name)),
      gamma_(name_ + ".gamma", Tensor(Shape{1, channels, rows, 1}, 1.0)),
      beta_(name_ + ".beta", Tensor(Shape{1, channels, rows, 1}, 0.0)),
      running_mean_(Shape{1, channels, rows, 1}, 0.0),
      running_var_(Shape{1, channels, rows, 1}, 1.0) {}

Tensor RowBatchNormLayer::forward(const Tensor& x, Mode mode) {
    return rowwise_batchnorm(x, gamma_.value, beta_.value, mode, running_mean_, running_var_, &cache_);
}

Tensor RowBatchNormLayer::backward(const Tensor& grad_output) {
    auto g = rowwise_batchnorm_backward(cache_, gamma_.value, grad_output);
    gamma_.grad.add(g.gamma);
    beta_.grad.add(g.beta);
    return std::move(g.input);
}

Tensor RowBatchNormLayer::infer(const Tensor& x) const {
    return rowwise_batchnorm_eval(x, gamma_.value, beta_.value, running_mean_, running_var_);
}

void RowBatchNormLayer::collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers) {
    params.push_back(&gamma_);
    params.push_back(&beta_);
    buffers.push_back({name_ + ".running_mean", &running_mean_});
    buffers.push_back({name_ + ".running_var", &running_var_});
}

// --- BnReluConv ----------------------------------------------------------------

BnReluConv::BnReluConv(const std::string& name, std::size_t in_channels, std::size_t rows,
                       std::size_t out_channels, std::size_t kernel, std::mt19937_64& rng)
    : bn_(name + ".bn", in_channels, rows), conv_(name + ".conv", in_channels, out_channels, kernel, rng) {}

Tensor BnReluConv::forward(const Tensor& x, Mode mode) {
    bn_out_ = bn_.forward(x, mode);
    return conv_.forward(relu(bn_out_), mode);
}

Tensor BnReluConv::backward(const Tensor& grad_output) {
    const Tensor d_act = conv_.backward(grad_output);
    return bn_.backward(relu_backward(bn_out_, d_act));
}

Tensor BnReluConv::infer(const Tensor& x) const { return conv_.infer(relu(bn_.infer(x))); }

void BnReluConv::collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers) {
    bn_.collect(params, buffers);
    conv_.collect(params, buffers);
}

// --- DenseBlock ----------------------------------------------------------------

DenseBlock::DenseBlock(const std::string& name, std::size_t in_channels, std::size_t rows,
                       std::size_t layers, std::size_t growth, std::mt19937_64& rng)
    : in_channels_(in_channels), growth_(growth) {
    if (layers == 0 || growth == 0 || in_channels == 0) {
        throw std::invalid_argument("dense block needs at least one layer, channel and growth");
    }
    layers_.reserve(layers);
    for (std::size_t i = 0; i < layers; ++i) {
        layers_.emplace_back(name + ".layer" + std::to_string(i), in_channels + i * growth, rows,
                             growth, 3, rng);
    }
}

Tensor DenseBlock::forward(const Tensor& x, Mode mode) {
    if (x.shape().c != in_channels_) {
        throw std::invalid_argument("dense block expects " + std::to_string(in_channels_) +
                                    " channels, got " + std::to_string(x.shape().c));
    }
    Tensor features = x;
    for (auto& layer : layers_) {
        const Tensor out = layer.forward(features, mode);
        const Tensor* parts[] = {&features, &out};
        features = Tensor::concat_channels(parts);
    }
    return features;
}

Tensor DenseBlock::backward(const Tensor& grad_output) {
    if (grad_output.shape().c != out_channels()) {
        throw std::invalid_argument("dense block backward: channel mismatch");
    }
    Tensor grad = grad_output;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const std::size_t seen = in_channels_ + i * growth_;
        const Tensor d_out = grad.slice_channels(seen, growth_);
        grad.add_to_channels(0, layers_[i].backward(d_out));
    }
    return grad.slice_channels(0, in_channels_);
}

Tensor DenseBlock::infer(const Tensor& x) const {
    if (x.shape().c != in_channels_) {
        throw std::invalid_argument("dense block expects " + std::to_string(in_channels_) +
                                    " channels, got " + std::to_string(x.shape().c));
    }
    Tensor features = x;
    for (const auto& layer : layers_) {
        const Tensor out = layer.infer(features);
        const Tensor* parts[] = {&features, &out};
        features = Tensor::concat_channels(parts);
    }
    return features;
}

void DenseBlock::collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers) {
    for (auto& layer : layers_) {
        layer.collect(params, buffers);
    }
}

// --- Transition ----------------------------------------------------------------

Transition::Transition(const std::string& name, std::size_t in_channels, std::size_t rows,
                       std::mt19937_64& rng)
    : unit_(name, in_channels, rows, std::max<std::size_t>(1, in_channels / 2), 1, rng),
      unit_out_(std::max<std::size_t>(1, in_channels / 2)) {}

Tensor Transition::forward(const Tensor& x, Mode mode) {
    const Tensor y = unit_.forward(x, mode);
    pre_pool_shape_ = y.shape();
    return avg_pool2x2(y);
}

Tensor Transition::backward(const Tensor& grad_output) {
    return unit_.backward(avg_pool2x2_backward(pre_pool_shape_, grad_output));
}

Tensor Transition::infer(const Tensor& x) const { return avg_pool2x2(unit_.infer(x)); }

void Transition::collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers) {
    unit_.collect(params, buffers);
}

// --- ClassifierHead ------------------------------------------------------------

ClassifierHead::ClassifierHead(const std::string& name, std::size_t in_channels, std::size_t rows,
                               std::size_t classes, std::mt19937_64& rng)
    : bn_(name + ".bn", in_channels, rows),
      weight_(name + ".fc.weight", he_normal(Shape{classes, in_channels, 1, 1}, in_channels, rng)),
      bias_(name + ".fc.bias", Tensor(Shape{1, classes, 1, 1})) {}

Tensor ClassifierHead::forward(const Tensor& x, Mode mode) {
    bn_out_ = bn_.forward(x, mode);
    const Tensor act = relu(bn_out_);
    pooled_from_ = act.shape();
    pooled_ = global_avg_pool(act);
    return affine(pooled_, weight_.value, bias_.value);
}

Tensor ClassifierHead::backward(const Tensor& grad_output) {
    auto g = affine_backward(pooled_, weight_.value, grad_output);
    weight_.grad.add(g.weight);
    bias_.grad.add(g.bias);
    const Tensor d_act = global_avg_pool_backward(pooled_from_, g.input);
    return bn_.backward(relu_backward(bn_out_, d_act));
}

Tensor ClassifierHead::infer(const Tensor& x) const {
    return affine(global_avg_pool(relu(bn_.infer(x))), weight_.value, bias_.value);
}

void ClassifierHead::collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers) {
    bn_.collect(params, buffers);
    params.push_back(&weight_);
    params.push_back(&bias_);
}

}  // namespace ecgaf::nn
