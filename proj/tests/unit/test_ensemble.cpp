#include "ecgaf/ensemble.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace ecgaf;
using namespace ecgaf::ensemble;
using features::FeatureVector;

TEST_SUITE("ensemble") {

TEST_CASE("one stump separates one-dimensional data") {
    std::vector<FeatureVector> x(10);
    std::vector<RhythmLabel> y;
    for (std::size_t i = 0; i < 10; ++i) {
        const bool nsr = i < 5;
        x[i][0] = nsr ? -1.0 - static_cast<double>(i) : 1.0 + static_cast<double>(i);
        y.push_back(nsr ? RhythmLabel::Normal : RhythmLabel::Other);
    }
    const AbstainModel m = train_adaboost_abstain(x, y, 1);
    REQUIRE(m.stumps.size() == 1);
    CHECK(m.stumps[0].feature_index == 0);
    CHECK(std::isfinite(m.stumps[0].alpha));
    const auto e = training_error(m, x, y);
    CHECK(e.wrong == 0);
    CHECK(e.abstained == 0);
    CHECK(e.rate() == 0.0);
}

TEST_CASE("boosting routes around missing values") {
    const auto d = testing::separable_features(50, 0.2, 7);
    std::vector<double> sums;
    const AbstainModel m = train_adaboost_abstain(d.x, d.y, 5, [&](const RoundLog& r) {
        sums.push_back(r.weight_sum);
        CHECK(r.epsilon >= kEpsilonFloor);
        CHECK(r.epsilon <= 1.0 - kEpsilonFloor);
    });
    CHECK(training_error(m, d.x, d.y).rate() == 0.0);
    CHECK(sums.size() == 5);
    for (double s : sums) {
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    CHECK(m.selected_features().size() <= m.stumps.size());
}

TEST_CASE("conflicting duplicates keep alpha finite") {
    std::vector<FeatureVector> x(6);
    std::vector<RhythmLabel> y;
    for (std::size_t i = 0; i < 6; ++i) {
        x[i][3] = 1.0;
        y.push_back(i % 2 ? RhythmLabel::Normal : RhythmLabel::Other);
    }
    const AbstainModel m = train_adaboost_abstain(x, y, 4);
    for (const Stump& s : m.stumps) {
        CHECK(std::isfinite(s.alpha));
    }
    CHECK(training_error(m, x, y).rate() >= 0.5);
}

TEST_CASE("training input errors") {
    std::vector<FeatureVector> x(4);
    for (std::size_t i = 0; i < 4; ++i) x[i][0] = static_cast<double>(i);
    const std::vector<RhythmLabel> one_class(4, RhythmLabel::Normal);
    CHECK_THROWS_AS(train_adaboost_abstain(x, one_class, 3), DataError);
    const std::vector<RhythmLabel> with_af{RhythmLabel::Normal, RhythmLabel::AF, RhythmLabel::Other,
                                           RhythmLabel::Other};
    CHECK_THROWS(train_adaboost_abstain(x, with_af, 3));
}

TEST_CASE("prediction rules") {
    AbstainModel m;
    m.rounds = 2;
    m.stumps.push_back({0, 0.5, 1, 0.8});
    FeatureVector none;
    CHECK(predict_abstain(m, none).verdict == Verdict::Abstain);

    FeatureVector x;
    x[0] = 1.0;
    const Prediction p = predict_abstain(m, x);
    const Verdict nsr_side = m.stumps[0].vote(x) > 0 ? Verdict::NSR : Verdict::Other;
    CHECK(p.verdict == nsr_side);
    CHECK(std::abs(p.score) == doctest::Approx(0.8));

    m.stumps.push_back({0, 0.5, -1, 0.8});
    const Prediction tie = predict_abstain(m, x);
    CHECK(tie.score == 0.0);
    CHECK(tie.verdict == Verdict::Abstain);
    CHECK(verdict_to_char(Verdict::Abstain) == '-');
}

TEST_CASE("predictions survive a monotone transform of a column") {
    auto d = testing::separable_features(40, 0.1, 3);
    const AbstainModel base = train_adaboost_abstain(d.x, d.y, 6);
    auto t = d;
    for (auto& row : t.x) {
        for (std::size_t f : {0u, 1u}) {
            if (row[f]) row[f] = std::exp(*row[f]);
        }
    }
    const AbstainModel moved = train_adaboost_abstain(t.x, t.y, 6);
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        CHECK(predict_abstain(base, d.x[i]).verdict == predict_abstain(moved, t.x[i]).verdict);
    }
}

TEST_CASE("AUC conventions") {
    const std::vector<RhythmLabel> y{RhythmLabel::Normal, RhythmLabel::Normal, RhythmLabel::Other,
                                     RhythmLabel::Other};
    CHECK(roc_auc(std::vector<double>{3, 2, 1, 0}, y) == 1.0);
    CHECK(roc_auc(std::vector<double>{0, 1, 2, 3}, y) == 0.0);
    CHECK(roc_auc(std::vector<double>{1, 1, 1, 1}, y) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{1, 2}, std::vector<RhythmLabel>(2, RhythmLabel::Other)),
                    DataError);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(4000);
    std::vector<RhythmLabel> labels(4000);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = u(rng);
        labels[i] = u(rng) < 0.5 ? RhythmLabel::Normal : RhythmLabel::Other;
    }
    CHECK(std::abs(roc_auc(s, labels) - 0.5) < 0.05);
}

TEST_CASE("model AUC on separable data") {
    const auto d = testing::separable_features(30, 0.0, 1);
    const AbstainModel m = train_adaboost_abstain(d.x, d.y, 3);
    CHECK(roc_auc(m, d.x, d.y) == 1.0);
}

TEST_CASE("model files round-trip bit-exactly") {
    const auto d = testing::separable_features(30, 0.2, 9);
    const AbstainModel m = train_adaboost_abstain(d.x, d.y, 7);
    std::stringstream buf;
    m.save(buf);
    CHECK(AbstainModel::load(buf) == m);
    std::stringstream junk("rubbish");
    CHECK_THROWS_AS(AbstainModel::load(junk), DataError);
}

}
