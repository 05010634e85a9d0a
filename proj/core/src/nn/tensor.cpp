#include "ecgaf/nn/tensor.hpp"

#include <algorithm>

namespace ecgaf::nn {

std::string Shape::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
        throw std::invalid_argument("tensor data size does not match shape " + shape_.str());
    }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add(const Tensor& other) {
    if (other.shape_ != shape_) {
        throw std::invalid_argument("tensor add: shape mismatch " + shape_.str() + " vs " +
                                    other.shape_.str());
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
}

Tensor Tensor::concat_channels(std::span<const Tensor* const> parts) {
    if (parts.empty()) {
        throw std::invalid_argument("concat of zero tensors");
    }
    const Shape first = parts.front()->shape();
    std::size_t channels = 0;
    for (const Tensor* p : parts) {
        const Shape& s = p->shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w) {
            throw std::invalid_argument("concat: incompatible shapes " + first.str() + " vs " + s.str());
        }
        channels += s.c;
    }
    Tensor out(Shape{first.n, channels, first.h, first.w});
    const std::size_t plane = first.h * first.w;
    for (std::size_t n = 0; n < first.n; ++n) {
        double* dst = out.data() + n * channels * plane;
        for (const Tensor* p : parts) {
            const std::size_t chunk = p->shape().c * plane;
            const double* src = p->data() + n * chunk;
            dst = std::copy(src, src + chunk, dst);
        }
    }
    return out;
}

Tensor Tensor::slice_channels(std::size_t first, std::size_t count) const {
    if (first + count > shape_.c) {
        throw std::out_of_range("slice_channels out of range");
    }
    Tensor out(Shape{shape_.n, count, shape_.h, shape_.w});
    const std::size_t plane = shape_.h * shape_.w;
    for (std::size_t n = 0; n < shape_.n; ++n) {
        const double* src = data() + (n * shape_.c + first) * plane;
        std::copy(src, src + count * plane, out.data() + n * count * plane);
    }
    return out;
}

void Tensor::add_to_channels(std::size_t first, const Tensor& part) {
    const Shape& s = part.shape();
    if (s.n != shape_.n || s.h != shape_.h || s.w != shape_.w || first + s.c > shape_.c) {
        throw std::invalid_argument("add_to_channels: incompatible shapes");
    }
    const std::size_t plane = shape_.h * shape_.w;
    for (std::size_t n = 0; n < shape_.n; ++n) {
        double* dst = data() + (n * shape_.c + first) * plane;
        const double* src = part.data() + n * s.c * plane;
        for (std::size_t i = 0; i < s.c * plane; ++i) {
            dst[i] += src[i];
        }
    }
}

}  // namespace ecgaf::nn
