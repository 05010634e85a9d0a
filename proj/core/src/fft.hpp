#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace ecgaf::detail {

/// Real-input forward DFT of fixed length backed by an FFTW plan.
/// Planning is serialized internally; one instance must not be shared across
/// threads, but independent instances may run concurrently.
class RealDft {
public:
    explicit RealDft(std::size_t n);
    ~RealDft();
    RealDft(const RealDft&) = delete;
    RealDft& operator=(const RealDft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    /// Transforms `input` (zero-padded to size()) and returns the
    /// non-negative-frequency half spectrum; valid until the next call.
    std::span<const std::complex<double>> forward(std::span<const double> input);

private:
    std::size_t n_;
    double* in_ = nullptr;
    void* out_ = nullptr;
    void* plan_ = nullptr;
};

}  // namespace ecgaf::detail
