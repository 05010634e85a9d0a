#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

/// Finite-difference verification of the analytic gradients.
namespace ecgaf::nn {

inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Below this magnitude the comparison is effectively absolute.
inline constexpr double kRelativeErrorFloor = 1e-6;

/// |a - n| / max(|a|, |n|, kRelativeErrorFloor).
double relative_error(double analytic, double numeric);

/// Central differences of `loss` with respect to every entry of `values`
/// (perturbed in place and restored); returns the worst relative error
/// against `analytic`.
double max_relative_error(std::span<double> values, std::span<const double> analytic,
                          const std::function<double()>& loss, double step = kFiniteDifferenceStep);

enum class GradCheckTarget {
    Conv2d,
    RowBatchNorm,
    DenseBlock,
    AvgPool,
    GlobalAvgPool,
    Affine,
    SoftmaxCrossEntropy,
    Model,
};

std::string to_string(GradCheckTarget target);

struct GradCheckReport {
    GradCheckTarget target;
    double max_relative_error = 0.0;
    std::size_t values_checked = 0;
};

/// Runs the check for one operation (or a reduced end-to-end DenseNet with
/// fewer than 5,000 parameters) on seeded random inputs and parameters,
/// covering every parameter and every input entry.
GradCheckReport gradient_check(GradCheckTarget target, std::uint64_t seed);

}  // namespace ecgaf::nn
