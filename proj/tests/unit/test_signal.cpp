#include "ecgaf/signal.hpp"
#include "ecgaf/types.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace ecgaf;

TEST_SUITE("signal") {

TEST_CASE("baseline window is the odd width nearest 0.6 s") {
    CHECK(signal::baseline_window(300.0) == 181);
    CHECK(signal::baseline_window(250.0) == 151);
    CHECK(signal::baseline_window(10.0) == 7);
    CHECK(signal::baseline_window(1.0) == 1);
}

TEST_CASE("moving average against a direct truncated-window oracle") {
    const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
    const auto y = signal::moving_average(x, 5);
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i >= 2 ? i - 2 : 0;
        const std::size_t hi = std::min<std::size_t>(i + 2, x.size() - 1);
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            s += x[j];
        }
        CHECK(y[i] == doctest::Approx(s / static_cast<double>(hi - lo + 1)).epsilon(1e-14));
    }
}

TEST_CASE("constant input has no baseline left") {
    const std::vector<double> x(5, 5.0);
    for (double v : signal::remove_baseline(x, 300.0)) {
        CHECK(v == doctest::Approx(0.0));
    }
}

TEST_CASE("DC offset on a 10 Hz sinusoid is removed") {
    const double fs = 300.0;
    std::vector<double> x(3000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = 2.0 + std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / fs);
    }
    const auto y = signal::remove_baseline(x, fs);
    double mean = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 300; i < 2700; ++i) {
        mean += y[i];
        ++n;
    }
    CHECK(std::abs(mean / static_cast<double>(n)) < 0.01);
}

TEST_CASE("non-finite samples are rejected") {
    std::vector<double> x(100, 0.0);
    x[40] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(signal::remove_baseline(x, 300.0), "invalid signal", DataError);
    x[40] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(signal::remove_baseline(x, 300.0), DataError);
}

TEST_CASE("resampling at the same rate is the identity") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    CHECK(signal::resample_linear(x, 250.0, 250.0) == x);
}

TEST_CASE("linear interpolation reproduces a ramp exactly") {
    std::vector<double> x(251);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(i);
    }
    const auto y = signal::resample_linear(x, 250.0, 300.0);
    CHECK(y.size() == 301);
    for (std::size_t j = 0; j < y.size(); ++j) {
        CHECK(y[j] == doctest::Approx(static_cast<double>(j) * 250.0 / 300.0).epsilon(1e-12));
    }
}

TEST_CASE("upsampled 5 Hz sinusoid stays close to the analytic curve") {
    std::vector<double> x(250);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::sin(2.0 * std::numbers::pi * 5.0 * static_cast<double>(i) / 250.0);
    }
    const auto y = signal::resample_linear(x, 250.0, 300.0);
    double worst = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double t = static_cast<double>(j) / 300.0;
        worst = std::max(worst, std::abs(y[j] - std::sin(2.0 * std::numbers::pi * 5.0 * t)));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("resampling needs two samples") {
    const std::vector<double> x{1.0};
    CHECK_THROWS_AS(signal::resample_linear(x, 250.0, 300.0), DataError);
}

TEST_CASE("unit normalization") {
    CHECK(signal::normalize_unit(std::vector<double>{-1, 0, 1}) == std::vector<double>{0, 0.5, 1});
    CHECK(signal::normalize_unit(std::vector<double>{7, 7, 7}) == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(signal::normalize_unit(std::vector<double>{2, 4, 3}) == std::vector<double>{0, 1, 0.5});
}

TEST_CASE("band-pass attenuates out-of-band tones") {
    const double fs = 300.0;
    auto tone = [&](double hz) {
        std::vector<double> x(3000);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs);
        }
        const auto y = signal::bandpass_zero_phase(x, fs, 5.0, 15.0);
        double peak = 0.0;
        for (std::size_t i = 600; i < 2400; ++i) {
            peak = std::max(peak, std::abs(y[i]));
        }
        return peak;
    };
    CHECK(tone(9.0) > 0.7);
    CHECK(tone(0.5) < 0.05);
    CHECK(tone(100.0) < 0.05);
}

TEST_CASE("record validation") {
    EcgRecord r;
    CHECK_THROWS_AS(validate(r), DataError);
    r.samples = {0.0, 1.0};
    CHECK_NOTHROW(validate(r));
    r.sampling_rate = 0.0;
    CHECK_THROWS_AS(validate(r), DataError);
}

TEST_CASE("label characters round-trip") {
    for (RhythmLabel l : kAllLabels) {
        CHECK(label_from_char(label_to_char(l)) == l);
    }
    CHECK(label_to_char(RhythmLabel::Noisy) == '~');
    CHECK_THROWS(label_from_char('x'));
}

}
