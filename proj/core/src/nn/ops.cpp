#include "ecgaf/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecgaf::nn {

namespace {

struct AxisRange {
    std::size_t lo;
    std::size_t hi;  // exclusive
};

// Output positions o for which o * stride + k - padding lies inside [0, in).
AxisRange valid_outputs(std::size_t in, std::size_t out, std::size_t k, std::size_t stride,
                        std::size_t padding) {
    const auto ik = static_cast<std::ptrdiff_t>(k);
    const auto ip = static_cast<std::ptrdiff_t>(padding);
    const auto is = static_cast<std::ptrdiff_t>(stride);
    const std::ptrdiff_t first = ik >= ip ? 0 : (ip - ik + is - 1) / is;
    const std::ptrdiff_t last_in = static_cast<std::ptrdiff_t>(in) - 1 + ip - ik;
    if (last_in < 0) {
        return {0, 0};
    }
    const std::ptrdiff_t end = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out), last_in / is + 1);
    if (end <= first) {
        return {0, 0};
    }
    return {static_cast<std::size_t>(first), static_cast<std::size_t>(end)};
}

void check_conv_shapes(const Tensor& input, const Tensor& weight, std::size_t padding) {
    const Shape& x = input.shape();
    const Shape& w = weight.shape();
    if (w.c != x.c) {
        throw std::invalid_argument("conv2d: weight expects " + std::to_string(w.c) +
                                    " input channels, got " + std::to_string(x.c));
    }
    if (w.h != w.w || w.h % 2 == 0) {
        throw std::invalid_argument("conv2d: kernel must be square with odd size");
    }
    if (x.h + 2 * padding < w.h || x.w + 2 * padding < w.w) {
        throw std::invalid_argument("conv2d: kernel larger than padded input");
    }
}

void check_bn_shapes(const Tensor& input, const Tensor& gamma, const Tensor& beta) {
    const Shape expected{1, input.shape().c, input.shape().h, 1};
    if (gamma.shape() != expected || beta.shape() != expected) {
        throw std::invalid_argument("rowwise_batchnorm: parameters must have shape " + expected.str());
    }
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                               std::size_t padding) {
    if (stride == 0 || in + 2 * padding < kernel) {
        throw std::invalid_argument("conv2d: invalid geometry");
    }
    return (in + 2 * padding - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
    check_conv_shapes(input, weight, padding);
    const Shape& xs = input.shape();
    const Shape& ws = weight.shape();
    if (bias.size() != ws.n) {
        throw std::invalid_argument("conv2d: bias size mismatch");
    }
    const std::size_t k = ws.h;
    const std::size_t oh_n = conv_output_extent(xs.h, k, stride, padding);
    const std::size_t ow_n = conv_output_extent(xs.w, k, stride, padding);
    Tensor out(Shape{xs.n, ws.n, oh_n, ow_n});

    for (std::size_t n = 0; n < xs.n; ++n) {
        for (std::size_t oc = 0; oc < ws.n; ++oc) {
            double* y = &out(n, oc, 0, 0);
            std::fill(y, y + oh_n * ow_n, bias[oc]);
            for (std::size_t ic = 0; ic < xs.c; ++ic) {
                const double* x = &input(n, ic, 0, 0);
                for (std::size_t kh = 0; kh < k; ++kh) {
                    const AxisRange rows = valid_outputs(xs.h, oh_n, kh, stride, padding);
                    for (std::size_t kw = 0; kw < k; ++kw) {
                        const AxisRange cols = valid_outputs(xs.w, ow_n, kw, stride, padding);
                        const double wv = weight(oc, ic, kh, kw);
                        for (std::size_t oh = rows.lo; oh < rows.hi; ++oh) {
                            const double* xr = x + (oh * stride + kh - padding) * xs.w;
                            double* yr = y + oh * ow_n;
                            if (stride == 1) {
                                const std::size_t shift = kw - padding;  // wraps; ow + shift stays in range
                                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                                    yr[ow] += wv * xr[ow + shift];
                                }
                            } else {
                                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                                    yr[ow] += wv * xr[ow * stride + kw - padding];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output,
                            std::size_t stride, std::size_t padding) {
    check_conv_shapes(input, weight, padding);
    const Shape& xs = input.shape();
    const Shape& ws = weight.shape();
    const std::size_t k = ws.h;
    const std::size_t oh_n = conv_output_extent(xs.h, k, stride, padding);
    const std::size_t ow_n = conv_output_extent(xs.w, k, stride, padding);
    if (grad_output.shape() != Shape{xs.n, ws.n, oh_n, ow_n}) {
        throw std::invalid_argument("conv2d_backward: grad_output shape mismatch");
    }

    Conv2dGrads g{Tensor(xs), Tensor(ws), Tensor(Shape{1, ws.n, 1, 1})};
    for (std::size_t n = 0; n < xs.n; ++n) {
        for (std::size_t oc = 0; oc < ws.n; ++oc) {
            const double* dy = &grad_output(n, oc, 0, 0);
            double db = 0.0;
            for (std::size_t i = 0; i < oh_n * ow_n; ++i) {
                db += dy[i];
            }
            g.bias[oc] += db;
            for (std::size_t ic = 0; ic < xs.c; ++ic) {
                const double* x = &input(n, ic, 0, 0);
                double* dx = &g.input(n, ic, 0, 0);
                for (std::size_t kh = 0; kh < k; ++kh) {
                    const AxisRange rows = valid_outputs(xs.h, oh_n, kh, stride, padding);
                    for (std::size_t kw = 0; kw < k; ++kw) {
                        const AxisRange cols = valid_outputs(xs.w, ow_n, kw, stride, padding);
                        const double wv = weight(oc, ic, kh, kw);
                        double dw = 0.0;
                        for (std::size_t oh = rows.lo; oh < rows.hi; ++oh) {
                            const std::size_t row_off = (oh * stride + kh - padding) * xs.w;
                            const double* dyr = dy + oh * ow_n;
                            for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                                const std::size_t idx = row_off + ow * stride + kw - padding;
                                dw += dyr[ow] * x[idx];
                                dx[idx] += wv * dyr[ow];
                            }
                        }
                        g.weight(oc, ic, kh, kw) += dw;
                    }
                }
            }
        }
    }
    return g;
}

Tensor rowwise_batchnorm(const Tensor& input, const Tensor& gamma, const Tensor& beta, Mode mode,
                         Tensor& running_mean, Tensor& running_var, BatchNormCache* cache) {
    check_bn_shapes(input, gamma, beta);
    if (mode == Mode::Eval && cache == nullptr) {
        return rowwise_batchnorm_eval(input, gamma, beta, running_mean, running_var);
    }
    const Shape& s = input.shape();
    const std::size_t groups = s.c * s.h;
    const double m = static_cast<double>(s.n * s.w);
    std::vector<double> mean(groups, 0.0), var(groups, 0.0);

    if (mode == Mode::Train) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t h = 0; h < s.h; ++h) {
                double sum = 0.0;
                for (std::size_t n = 0; n < s.n; ++n) {
                    const double* row = &input(n, c, h, 0);
                    for (std::size_t w = 0; w < s.w; ++w) {
                        sum += row[w];
                    }
                }
                const double mu = sum / m;
                double ss = 0.0;
                for (std::size_t n = 0; n < s.n; ++n) {
                    const double* row = &input(n, c, h, 0);
                    for (std::size_t w = 0; w < s.w; ++w) {
                        ss += (row[w] - mu) * (row[w] - mu);
                    }
                }
                mean[c * s.h + h] = mu;
                var[c * s.h + h] = ss / m;
            }
        }
        for (std::size_t g = 0; g < groups; ++g) {
            running_mean[g] = kBatchNormMomentum * running_mean[g] + (1.0 - kBatchNormMomentum) * mean[g];
            running_var[g] = kBatchNormMomentum * running_var[g] + (1.0 - kBatchNormMomentum) * var[g];
        }
    } else {
        for (std::size_t g = 0; g < groups; ++g) {
            mean[g] = running_mean[g];
            var[g] = running_var[g];
        }
    }

    Tensor out(s);
    Tensor normalized(s);
    std::vector<double> inv_std(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        inv_std[g] = 1.0 / std::sqrt(var[g] + kBatchNormEpsilon);
    }
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t h = 0; h < s.h; ++h) {
                const std::size_t g = c * s.h + h;
                const double* x = &input(n, c, h, 0);
                double* xn = &normalized(n, c, h, 0);
                double* y = &out(n, c, h, 0);
                for (std::size_t w = 0; w < s.w; ++w) {
                    xn[w] = (x[w] - mean[g]) * inv_std[g];
                    y[w] = gamma[g] * xn[w] + beta[g];
                }
            }
        }
    }
    if (cache != nullptr) {
        cache->mode = mode;
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return out;
}

Tensor rowwise_batchnorm_eval(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                              const Tensor& running_mean, const Tensor& running_var) {
    check_bn_shapes(input, gamma, beta);
    const Shape& s = input.shape();
    Tensor out(s);
    for (std::size_t c = 0; c < s.c; ++c) {
        for (std::size_t h = 0; h < s.h; ++h) {
            const std::size_t g = c * s.h + h;
            const double scale = gamma[g] / std::sqrt(running_var[g] + kBatchNormEpsilon);
            const double shift = beta[g] - running_mean[g] * scale;
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* x = &input(n, c, h, 0);
                double* y = &out(n, c, h, 0);
                for (std::size_t w = 0; w < s.w; ++w) {
                    y[w] = x[w] * scale + shift;
                }
            }
        }
    }
    return out;
}

BatchNormGrads rowwise_batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                          const Tensor& grad_output) {
    const Shape& s = cache.normalized.shape();
    if (grad_output.shape() != s) {
        throw std::invalid_argument("rowwise_batchnorm_backward: shape mismatch");
    }
    BatchNormGrads g{Tensor(s), Tensor(gamma.shape()), Tensor(gamma.shape())};
    const double m = static_cast<double>(s.n * s.w);
    for (std::size_t c = 0; c < s.c; ++c) {
        for (std::size_t h = 0; h < s.h; ++h) {
            const std::size_t grp = c * s.h + h;
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* dy = &grad_output(n, c, h, 0);
                const double* xh = &cache.normalized(n, c, h, 0);
                for (std::size_t w = 0; w < s.w; ++w) {
                    sum_dy += dy[w];
                    sum_dy_xhat += dy[w] * xh[w];
                }
            }
            g.beta[grp] = sum_dy;
            g.gamma[grp] = sum_dy_xhat;
            const double scale = gamma[grp] * cache.inv_std[grp];
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* dy = &grad_output(n, c, h, 0);
                const double* xh = &cache.normalized(n, c, h, 0);
                double* dx = &g.input(n, c, h, 0);
                if (cache.mode == Mode::Train) {
                    for (std::size_t w = 0; w < s.w; ++w) {
                        dx[w] = scale * (dy[w] - sum_dy / m - xh[w] * sum_dy_xhat / m);
                    }
                } else {
                    for (std::size_t w = 0; w < s.w; ++w) {
                        dx[w] = scale * dy[w];
                    }
                }
            }
        }
    }
    return g;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = input[i] > 0.0 ? input[i] : 0.0;
    }
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
    Tensor g(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        g[i] = input[i] > 0.0 ? grad_output[i] : 0.0;
    }
    return g;
}

Tensor avg_pool2x2(const Tensor& input) {
    const Shape& s = input.shape();
    if (s.h < 2 || s.w < 2) {
        throw std::invalid_argument("avg_pool2x2: input smaller than 2x2");
    }
    Tensor out(Shape{s.n, s.c, s.h / 2, s.w / 2});
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t h = 0; h < s.h / 2; ++h) {
                const double* r0 = &input(n, c, 2 * h, 0);
                const double* r1 = &input(n, c, 2 * h + 1, 0);
                double* y = &out(n, c, h, 0);
                for (std::size_t w = 0; w < s.w / 2; ++w) {
                    y[w] = 0.25 * (r0[2 * w] + r0[2 * w + 1] + r1[2 * w] + r1[2 * w + 1]);
                }
            }
        }
    }
    return out;
}

Tensor avg_pool2x2_backward(const Shape& input_shape, const Tensor& grad_output) {
    const Shape& s = input_shape;
    if (grad_output.shape() != Shape{s.n, s.c, s.h / 2, s.w / 2}) {
        throw std::invalid_argument("avg_pool2x2_backward: shape mismatch");
    }
    Tensor g(s);
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t h = 0; h < s.h / 2; ++h) {
                const double* dy = &grad_output(n, c, h, 0);
                double* r0 = &g(n, c, 2 * h, 0);
                double* r1 = &g(n, c, 2 * h + 1, 0);
                for (std::size_t w = 0; w < s.w / 2; ++w) {
                    const double v = 0.25 * dy[w];
                    r0[2 * w] = v;
                    r0[2 * w + 1] = v;
                    r1[2 * w] = v;
                    r1[2 * w + 1] = v;
                }
            }
        }
    }
    return g;
}

Tensor global_avg_pool(const Tensor& input) {
    const Shape& s = input.shape();
    const std::size_t plane = s.h * s.w;
    Tensor out(Shape{s.n, s.c, 1, 1});
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            const double* x = &input(n, c, 0, 0);
            double sum = 0.0;
            for (std::size_t i = 0; i < plane; ++i) {
                sum += x[i];
            }
            out(n, c, 0, 0) = sum / static_cast<double>(plane);
        }
    }
    return out;
}

Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_output) {
    const Shape& s = input_shape;
    const std::size_t plane = s.h * s.w;
    Tensor g(s);
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            const double v = grad_output(n, c, 0, 0) / static_cast<double>(plane);
            double* dx = &g(n, c, 0, 0);
            std::fill(dx, dx + plane, v);
        }
    }
    return g;
}

Tensor affine(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    const Shape& xs = input.shape();
    const Shape& ws = weight.shape();
    const std::size_t in = xs.c * xs.h * xs.w;
    if (ws.c != in || ws.h != 1 || ws.w != 1 || bias.size() != ws.n) {
        throw std::invalid_argument("affine: shape mismatch");
    }
    Tensor out(Shape{xs.n, ws.n, 1, 1});
    for (std::size_t n = 0; n < xs.n; ++n) {
        const double* x = input.data() + n * in;
        for (std::size_t o = 0; o < ws.n; ++o) {
            const double* w = weight.data() + o * in;
            double acc = bias[o];
            for (std::size_t i = 0; i < in; ++i) {
                acc += w[i] * x[i];
            }
            out(n, o, 0, 0) = acc;
        }
    }
    return out;
}

AffineGrads affine_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output) {
    const Shape& xs = input.shape();
    const Shape& ws = weight.shape();
    const std::size_t in = xs.c * xs.h * xs.w;
    if (grad_output.shape() != Shape{xs.n, ws.n, 1, 1}) {
        throw std::invalid_argument("affine_backward: shape mismatch");
    }
    AffineGrads g{Tensor(xs), Tensor(ws), Tensor(Shape{1, ws.n, 1, 1})};
    for (std::size_t n = 0; n < xs.n; ++n) {
        const double* x = input.data() + n * in;
        double* dx = g.input.data() + n * in;
        for (std::size_t o = 0; o < ws.n; ++o) {
            const double dy = grad_output(n, o, 0, 0);
            const double* w = weight.data() + o * in;
            double* dw = g.weight.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                dw[i] += dy * x[i];
                dx[i] += dy * w[i];
            }
            g.bias[o] += dy;
        }
    }
    return g;
}

Tensor softmax(const Tensor& logits) {
    const Shape& s = logits.shape();
    const std::size_t k = s.c * s.h * s.w;
    Tensor p(s);
    for (std::size_t n = 0; n < s.n; ++n) {
        const double* z = logits.data() + n * k;
        double* out = p.data() + n * k;
        const double zmax = *std::max_element(z, z + k);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = std::exp(z[i] - zmax);
            total += out[i];
        }
        for (std::size_t i = 0; i < k; ++i) {
            out[i] /= total;
        }
    }
    return p;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
    const Shape& s = logits.shape();
    const std::size_t k = s.c * s.h * s.w;
    if (labels.size() != s.n || s.n == 0) {
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    }
    LossResult r{0.0, softmax(logits), Tensor(s)};
    const double inv_n = 1.0 / static_cast<double>(s.n);
    for (std::size_t n = 0; n < s.n; ++n) {
        if (labels[n] >= k) {
            throw std::invalid_argument("softmax_cross_entropy: label out of range");
        }
        const double* z = logits.data() + n * k;
        const double zmax = *std::max_element(z, z + k);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            total += std::exp(z[i] - zmax);
        }
        const double log_sum_exp = zmax + std::log(total);
        r.loss += (log_sum_exp - z[labels[n]]) * inv_n;
        for (std::size_t i = 0; i < k; ++i) {
            const double onehot = i == labels[n] ? 1.0 : 0.0;
            r.grad_logits[n * k + i] = (r.probabilities[n * k + i] - onehot) * inv_n;
        }
    }
    return r;
}

}  // namespace ecgaf::nn
