#pragma once

#include "ecgaf/nn/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

/// Differentiable kernels. Each forward has a matching backward that returns
/// gradients with respect to every input it consumed.
namespace ecgaf::nn {

enum class Mode { Train, Eval };

// ---------------------------------------------------------------------------
// Convolution (cross-correlation), weight layout (out, in, k, k), bias (1, out, 1, 1).

struct Conv2dGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

/// Output extent along one axis: floor((in + 2p - k) / stride) + 1.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                               std::size_t padding);

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding);

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output,
                            std::size_t stride, std::size_t padding);

// ---------------------------------------------------------------------------
// Row-wise batch normalization: one (mean, variance) per (channel, row) pair,
// reduced over batch and columns. gamma/beta/running stats have shape (1, c, h, 1).

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct BatchNormCache {
    Mode mode = Mode::Train;
    Tensor normalized;           // x-hat
    std::vector<double> inv_std; // per (channel, row)
};

struct BatchNormGrads {
    Tensor input;
    Tensor gamma;
    Tensor beta;
};

/// Train mode normalizes with batch statistics and folds them into the running
/// stats (running = 0.9 * running + 0.1 * batch); eval mode uses the running
/// stats verbatim. `cache` may be null when no backward pass will follow.
Tensor rowwise_batchnorm(const Tensor& input, const Tensor& gamma, const Tensor& beta, Mode mode,
                         Tensor& running_mean, Tensor& running_var, BatchNormCache* cache);

/// Eval-mode forward that touches no state.
Tensor rowwise_batchnorm_eval(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                              const Tensor& running_mean, const Tensor& running_var);

BatchNormGrads rowwise_batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                          const Tensor& grad_output);

// ---------------------------------------------------------------------------

Tensor relu(const Tensor& input);
/// Gradient through ReLU given the forward *input*.
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);

/// 2x2 average pooling with stride 2; odd trailing rows/columns are dropped.
Tensor avg_pool2x2(const Tensor& input);
Tensor avg_pool2x2_backward(const Shape& input_shape, const Tensor& grad_output);

/// Mean over (h, w): (n, c, h, w) -> (n, c, 1, 1).
Tensor global_avg_pool(const Tensor& input);
Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_output);

struct AffineGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

/// y = W x + b for x of shape (n, in, 1, 1), W of shape (out, in, 1, 1), b (1, out, 1, 1).
Tensor affine(const Tensor& input, const Tensor& weight, const Tensor& bias);
AffineGrads affine_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output);

// ---------------------------------------------------------------------------

/// Row-wise softmax of (n, classes, 1, 1) logits.
Tensor softmax(const Tensor& logits);

struct LossResult {
    double loss = 0.0;     // mean over the batch
    Tensor probabilities;  // softmax(logits)
    Tensor grad_logits;    // (softmax - onehot) / n
};

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

}  // namespace ecgaf::nn
