#include "ecgaf/spectrogram.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace ecgaf;

TEST_SUITE("spectrogram") {

TEST_CASE("15 s at 300 Hz leaves room for a full 375-frame segment") {
    const std::vector<double> x(4500, 0.1);
    const auto s = spectrogram::stft_magnitude(x, 300.0);
    CHECK(s.bins() == 20);
    CHECK(s.frames() >= 375);
    CHECK(s.frames() == (4500 + 75 - 75) / 12 + 1);
    CHECK(s.hop_samples == 12);
    CHECK(s.bin_hz == doctest::Approx(300.0 / 128.0));
    CHECK(spectrogram::extract_segments(s, std::vector<std::size_t>{0}, 375).size() == 1);
}

TEST_CASE("zero signal gives zero magnitudes") {
    const std::vector<double> x(3000, 0.0);
    for (double v : spectrogram::stft_magnitude(x, 300.0).magnitudes.data) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("bin-centred sinusoid peaks in its bin") {
    const double fs = 300.0;
    const double f = 10.0 * fs / 128.0;
    std::vector<double> x(4500);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
    }
    const auto s = spectrogram::stft_magnitude(x, fs);
    std::size_t best = 0;
    double best_mean = -1.0;
    for (std::size_t r = 0; r < s.bins(); ++r) {
        double m = 0.0;
        for (std::size_t t = 0; t < s.frames(); ++t) {
            m += s.magnitudes(r, t);
        }
        if (m > best_mean) {
            best_mean = m;
            best = r;
        }
    }
    CHECK(best == 10);
}

TEST_CASE("raw magnitudes are linear in amplitude") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(1200), y(1200);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = n(rng);
        y[i] = 3.0 * x[i];
    }
    spectrogram::StftConfig cfg;
    cfg.log_compress = false;
    const auto a = spectrogram::stft_magnitude(x, 300.0, cfg);
    const auto b = spectrogram::stft_magnitude(y, 300.0, cfg);
    for (std::size_t i = 0; i < a.magnitudes.data.size(); ++i) {
        CHECK(b.magnitudes.data[i] == doctest::Approx(3.0 * a.magnitudes.data[i]).epsilon(1e-10));
    }
}

TEST_CASE("entries are finite and non-negative") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 5.0);
    std::vector<double> x(2000);
    for (double& v : x) {
        v = n(rng);
    }
    for (double v : spectrogram::stft_magnitude(x, 300.0).magnitudes.data) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("input shorter than one window is rejected") {
    const std::vector<double> x(74, 1.0);
    CHECK_THROWS_AS(spectrogram::stft_magnitude(x, 300.0), DataError);
}

TEST_CASE("segments only at peaks with room for the full width") {
    const std::vector<double> x(18000, 0.2);  // 60 s
    const auto s = spectrogram::stft_magnitude(x, 300.0);
    std::vector<std::size_t> early;
    for (std::size_t p = 0; p < 12000; p += 300) {
        early.push_back(p);
    }
    const auto segs = spectrogram::extract_segments(s, early, 375);
    CHECK(segs.size() == early.size());
    for (const auto& seg : segs) {
        CHECK(seg.matrix.rows == 20);
        CHECK(seg.matrix.cols == 375);
    }
    CHECK(spectrogram::extract_segments(s, std::vector<std::size_t>{15500}, 375).empty());
}

TEST_CASE("segment content is the spectrogram slice") {
    std::vector<double> x(4000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::sin(0.05 * static_cast<double>(i * i % 977));
    }
    const auto s = spectrogram::stft_magnitude(x, 300.0);
    const auto seg = spectrogram::extract_segments(s, std::vector<std::size_t>{600}, 100);
    REQUIRE(seg.size() == 1);
    CHECK(seg[0].anchor_peak == 600);
    for (std::size_t r = 0; r < 20; ++r) {
        for (std::size_t t = 0; t < 100; ++t) {
            CHECK(seg[0].matrix(r, t) == s.magnitudes(r, 50 + t));
        }
    }
}

TEST_CASE("9 s record with a peak at 0 gives one secondary segment") {
    const std::vector<double> x(2700, 0.3);
    const auto s = spectrogram::stft_magnitude(x, 300.0);
    CHECK(s.frames() >= 225);
    const auto segs = spectrogram::extract_segments(s, std::vector<std::size_t>{0}, 225);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].matrix.rows == 20);
    CHECK(segs[0].matrix.cols == 225);
}

TEST_CASE("segment_at bounds") {
    const std::vector<double> x(2700, 0.3);
    const auto s = spectrogram::stft_magnitude(x, 300.0);
    CHECK_NOTHROW(spectrogram::segment_at(s, s.frames() - 225, 225));
    CHECK_THROWS_AS(spectrogram::segment_at(s, s.frames() - 224, 225), std::out_of_range);
}

}
