#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecgaf::nn {

/// NCHW extents. Lower-rank data uses trailing 1s, e.g. logits are (b, 4, 1, 1).
struct Shape {
    std::size_t n = 1;
    std::size_t c = 1;
    std::size_t h = 1;
    std::size_t w = 1;

    constexpr std::size_t size() const { return n * c * h * w; }
    constexpr bool operator==(const Shape&) const = default;

    std::string str() const;
};

/// Dense double-precision NCHW tensor with value semantics.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }
    double& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        return data_[offset(n, c, h, w)];
    }
    const double& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return data_[offset(n, c, h, w)];
    }
    double& operator[](std::size_t i) { return data_[i]; }
    const double& operator[](std::size_t i) const { return data_[i]; }

    void fill(double v);
    /// this += other (same shape).
    void add(const Tensor& other);

    /// Channel-wise concatenation of tensors sharing n, h and w.
    static Tensor concat_channels(std::span<const Tensor* const> parts);
    /// Channels [first, first + count) of this tensor.
    Tensor slice_channels(std::size_t first, std::size_t count) const;
    /// Adds `part` into channels [first, first + part.c).
    void add_to_channels(std::size_t first, const Tensor& part);

private:
    Shape shape_{0, 0, 0, 0};
    std::vector<double> data_;
};

}  // namespace ecgaf::nn
