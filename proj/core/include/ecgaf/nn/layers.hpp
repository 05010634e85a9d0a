#pragma once

#include "ecgaf/nn/ops.hpp"
#include "ecgaf/nn/tensor.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace ecgaf::nn {

/// A trainable tensor and its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
};

/// Non-trainable state that is still part of the model (running statistics).
struct Buffer {
    std::string name;
    Tensor* value;
};

// Layers share a small protocol:
//   forward(x, mode)  caches what backward needs (not thread-safe)
//   backward(dy)      accumulates parameter gradients and returns dx
//   infer(x)          eval-mode forward without side effects
//   collect(params, buffers) appends state in a fixed order

class Conv2dLayer {
public:
    Conv2dLayer() = default;
    Conv2dLayer(std::string name, std::size_t in_channels, std::size_t out_channels,
                std::size_t kernel, std::mt19937_64& rng);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_output);
    Tensor infer(const Tensor& x) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

    std::size_t out_channels() const { return weight_.value.shape().n; }

private:
    Parameter weight_;
    Parameter bias_;
    std::size_t padding_ = 0;
    Tensor input_;
};

class RowBatchNormLayer {
public:
    RowBatchNormLayer() = default;
    RowBatchNormLayer(std::string name, std::size_t channels, std::size_t rows);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_output);
    Tensor infer(const Tensor& x) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

private:
    std::string name_;
    Parameter gamma_;
    Parameter beta_;
    Tensor running_mean_;
    Tensor running_var_;
    BatchNormCache cache_;
};

/// Pre-activation composite: row-wise BN -> ReLU -> conv.
class BnReluConv {
public:
    BnReluConv() = default;
    BnReluConv(const std::string& name, std::size_t in_channels, std::size_t rows,
               std::size_t out_channels, std::size_t kernel, std::mt19937_64& rng);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_output);
    Tensor infer(const Tensor& x) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

private:
    RowBatchNormLayer bn_;
    Conv2dLayer conv_;
    Tensor bn_out_;
};

/// L densely connected BN-ReLU-Conv3x3 layers; layer i sees the concatenation
/// of the block input and all earlier layer outputs. Output has
/// in_channels + layers * growth channels.
class DenseBlock {
public:
    DenseBlock() = default;
    DenseBlock(const std::string& name, std::size_t in_channels, std::size_t rows,
               std::size_t layers, std::size_t growth, std::mt19937_64& rng);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_output);
    Tensor infer(const Tensor& x) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

    std::size_t in_channels() const { return in_channels_; }
    std::size_t out_channels() const { return in_channels_ + layers_.size() * growth_; }
    std::size_t depth() const { return layers_.size(); }

private:
    std::size_t in_channels_ = 0;
    std::size_t growth_ = 0;
    std::vector<BnReluConv> layers_;
};

/// BN -> ReLU -> 1x1 conv (channels halved) -> 2x2 average pool.
class Transition {
public:
    Transition() = default;
    Transition(const std::string& name, std::size_t in_channels, std::size_t rows,
               std::mt19937_64& rng);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_output);
    Tensor infer(const Tensor& x) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

    std::size_t out_channels() const { return unit_out_; }

private:
    BnReluConv unit_;
    std::size_t unit_out_ = 0;
    Shape pre_pool_shape_;
};

/// Final BN -> ReLU -> global average pool -> affine to class logits.
class ClassifierHead {
public:
    ClassifierHead() = default;
    ClassifierHead(const std::string& name, std::size_t in_channels, std::size_t rows,
                   std::size_t classes, std::mt19937_64& rng);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_output);
    Tensor infer(const Tensor& x) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

private:
    RowBatchNormLayer bn_;
    Parameter weight_;
    Parameter bias_;
    Tensor bn_out_;
    Shape pooled_from_;
    Tensor pooled_;
};

}  // namespace ecgaf::nn
