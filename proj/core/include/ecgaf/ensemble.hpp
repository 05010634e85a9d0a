#pragma once

#include "ecgaf/features.hpp"
#include "ecgaf/types.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

/// Binary NSR-vs-Other boosting with stumps that abstain on missing features.
namespace ecgaf::ensemble {

enum class Verdict { NSR, Other, Abstain };

char verdict_to_char(Verdict v);

/// h(x) = polarity if x[feature] > threshold, -polarity otherwise, 0 if missing.
/// NSR votes +1, Other votes -1.
struct Stump {
    std::size_t feature_index = 0;
    double threshold = 0.0;
    int polarity = 1;
    double alpha = 0.0;

    int vote(const features::FeatureVector& x) const;
    bool operator==(const Stump&) const = default;
};

struct AbstainModel {
    std::vector<Stump> stumps;
    std::size_t rounds = 0;

    /// Distinct feature indices in first-use order.
    std::vector<std::size_t> selected_features() const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static AbstainModel load(std::istream& in);
    static AbstainModel load(const std::filesystem::path& path);

    bool operator==(const AbstainModel&) const = default;
};

struct RoundLog {
    std::size_t round = 0;
    Stump stump;
    double epsilon = 0.0;     // clamped weighted error incl. half the abstain weight
    double weight_sum = 0.0;  // after renormalization
};

inline constexpr std::size_t kDefaultRounds = 100;
inline constexpr double kEpsilonFloor = 1e-10;

/// Labels must be Normal or Other, with at least two examples of each
/// (DataError otherwise). The stump search is exhaustive over features and
/// midpoint thresholds; ties go to the lowest feature index, then the lowest
/// threshold, then positive polarity.
AbstainModel train_adaboost_abstain(std::span<const features::FeatureVector> x,
                                    std::span<const RhythmLabel> y, std::size_t rounds,
                                    const std::function<void(const RoundLog&)>& on_round = {});

struct Prediction {
    Verdict verdict = Verdict::Abstain;
    double score = 0.0;  // sum of alpha * vote over non-abstaining stumps
};

/// Abstains when every stump abstains or the score is exactly zero.
Prediction predict_abstain(const AbstainModel& model, const features::FeatureVector& x);

struct ErrorSummary {
    std::size_t wrong = 0;
    std::size_t abstained = 0;
    std::size_t total = 0;
    /// Error over non-abstained predictions (0 when all abstain).
    double rate() const;
};

ErrorSummary training_error(const AbstainModel& model, std::span<const features::FeatureVector> x,
                            std::span<const RhythmLabel> y);

/// Mann-Whitney AUC with NSR as the positive class and ties counted one half.
double roc_auc(std::span<const double> scores, std::span<const RhythmLabel> y);
double roc_auc(const AbstainModel& model, std::span<const features::FeatureVector> x,
               std::span<const RhythmLabel> y);

}  // namespace ecgaf::ensemble
