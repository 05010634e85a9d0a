#include "ecgaf/qrs.hpp"
#include "ecgaf/sqi.hpp"
#include "ecgaf/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ecgaf;

namespace {

// A fixed asymmetric beat shape repeated every `period` samples, sign set per beat.
std::vector<double> beat_train(std::size_t beats, std::size_t period, bool alternate,
                               std::vector<std::size_t>& peaks) {
    std::vector<double> x(beats * period, 0.0);
    peaks.clear();
    for (std::size_t b = 0; b < beats; ++b) {
        const std::size_t c = b * period + period / 2;
        const double sign = alternate && b % 2 == 1 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < period; ++i) {
            const double t = (static_cast<double>(b * period + i) - static_cast<double>(c)) / 10.0;
            x[b * period + i] = sign * (std::exp(-t * t) - 0.3 * std::exp(-(t - 3) * (t - 3)));
        }
        peaks.push_back(c);
    }
    return x;
}

}  // namespace

TEST_SUITE("sqi") {

TEST_CASE("identical beats correlate perfectly with the template") {
    std::vector<std::size_t> peaks;
    const auto x = beat_train(10, 240, false, peaks);
    const auto q = sqi::template_match_sqi(x, 300.0, peaks);
    REQUIRE(q.has_value());
    CHECK(*q == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("beats of alternating polarity cancel the template") {
    std::vector<std::size_t> peaks;
    const auto x = beat_train(10, 240, true, peaks);
    const auto q = sqi::template_match_sqi(x, 300.0, peaks);
    REQUIRE(q.has_value());
    CHECK(std::abs(*q) < 0.1);
}

TEST_CASE("white noise with fake peaks fails the gate") {
    const auto r = synth::white_noise(60.0, 300.0, 1.0, 17);
    std::vector<std::size_t> peaks;
    for (std::size_t p = 150; p < r.samples.size(); p += 240) {
        peaks.push_back(p);
    }
    const auto q = sqi::template_match_sqi(r.samples, 300.0, peaks);
    REQUIRE(q.has_value());
    CHECK(*q < 0.5);
}

TEST_CASE("fewer than two complete beats is missing") {
    std::vector<double> x(3000, 0.0);
    CHECK_FALSE(sqi::template_match_sqi(x, 300.0, std::vector<std::size_t>{1500}).has_value());
    CHECK_FALSE(sqi::template_match_sqi(x, 300.0, std::vector<std::size_t>{}).has_value());
}

TEST_CASE("template SQI is invariant under positive affine maps") {
    const auto s = synth::synth_ecg({.bpm = 70, .duration_s = 30, .noise_sd = 0.05, .seed = 4});
    const auto peaks = qrs::detect_pan_tompkins(s.record.samples, 300.0);
    const auto base = sqi::template_match_sqi(s.record.samples, 300.0, peaks);
    std::vector<double> y(s.record.samples);
    for (double& v : y) {
        v = 4.5 * v - 2.0;
    }
    const auto moved = sqi::template_match_sqi(y, 300.0, peaks);
    REQUIRE(base.has_value());
    REQUIRE(moved.has_value());
    CHECK(*moved == doctest::Approx(*base).epsilon(1e-9));
    CHECK(*base > 0.9);
}

TEST_CASE("bSQI counting") {
    std::vector<std::size_t> a;
    for (std::size_t i = 0; i < 10; ++i) {
        a.push_back(300 + i * 300);
    }
    CHECK(sqi::bsqi(a, a, 300.0) == 1.0);
    CHECK(sqi::bsqi({}, {}, 300.0) == 1.0);

    const std::vector<std::size_t> d1{0, 1000, 2000, 3000, 4000};
    const std::vector<std::size_t> d2{500, 1500, 2500, 3500, 4500};
    CHECK(sqi::bsqi(d1, d2, 300.0) == 0.0);

    std::vector<std::size_t> b;
    for (std::size_t p : a) {
        b.push_back(p + 9);  // 30 ms at 300 Hz
    }
    b.push_back(3400);
    b.push_back(3700);
    CHECK(sqi::bsqi(a, b, 300.0) == doctest::Approx(10.0 / 12.0));
    CHECK(sqi::bsqi(b, a, 300.0) == sqi::bsqi(a, b, 300.0));
}

TEST_CASE("bSQI stays in the unit interval") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pos(0, 6000);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::size_t> a(rng() % 20), b(rng() % 20);
        for (auto& v : a) v = pos(rng);
        for (auto& v : b) v = pos(rng);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const double q = sqi::bsqi(a, b, 300.0);
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
    }
}

TEST_CASE("Pearson correlation") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    const std::vector<double> c{4, 3, 2, 1};
    const std::vector<double> flat{1, 1, 1, 1};
    CHECK(sqi::pearson(a, b) == doctest::Approx(1.0));
    CHECK(sqi::pearson(a, c) == doctest::Approx(-1.0));
    CHECK(sqi::pearson(a, flat) == 0.0);
}

}
