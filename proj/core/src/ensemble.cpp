#include "ecgaf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ecgaf::ensemble {

namespace {

constexpr const char* kMagic = "ecgaf-adaboost-abstain";
constexpr int kFormatVersion = 1;

int sign_of(RhythmLabel label) {
    switch (label) {
        case RhythmLabel::Normal: return 1;
        case RhythmLabel::Other: return -1;
        default: throw DataError("post-processor labels must be N or O");
    }
}

std::vector<int> signs_of(std::span<const RhythmLabel> y) {
    std::vector<int> s(y.size());
    std::transform(y.begin(), y.end(), s.begin(), sign_of);
    return s;
}

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_real(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
        throw DataError("post-processor model: invalid number '" + token + "'");
    }
    return v;
}

// Feature column with the present entries sorted by value.
struct Column {
    std::vector<std::pair<double, std::size_t>> present;
    std::vector<std::size_t> missing;
};

struct Candidate {
    double epsilon = std::numeric_limits<double>::infinity();
    Stump stump;
};

}  // namespace

char verdict_to_char(Verdict v) {
    switch (v) {
        case Verdict::NSR: return 'N';
        case Verdict::Other: return 'O';
        case Verdict::Abstain: return '-';
    }
    return '?';
}

int Stump::vote(const features::FeatureVector& x) const {
    const Feature& f = x[feature_index];
    if (!f) {
        return 0;
    }
    return *f > threshold ? polarity : -polarity;
}

std::vector<std::size_t> AbstainModel::selected_features() const {
    std::vector<std::size_t> out;
    for (const Stump& s : stumps) {
        if (std::find(out.begin(), out.end(), s.feature_index) == out.end()) {
            out.push_back(s.feature_index);
        }
    }
    return out;
}

void AbstainModel::save(std::ostream& out) const {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "classes N O\n";
    out << "rounds " << rounds << '\n';
    out << "stumps " << stumps.size() << '\n';
    for (const Stump& s : stumps) {
        out << s.feature_index << ' ' << hex(s.threshold) << ' ' << s.polarity << ' ' << hex(s.alpha)
            << '\n';
    }
    if (!out) {
        throw DataError("failed to write post-processor model");
    }
}

void AbstainModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    save(out);
}

AbstainModel AbstainModel::load(std::istream& in) {
    std::string magic, key, a, b;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic || version != kFormatVersion) {
        throw DataError("not a post-processor model file");
    }
    if (!(in >> key >> a >> b) || key != "classes" || a != "N" || b != "O") {
        throw DataError("post-processor model: bad classes line");
    }
    AbstainModel model;
    std::size_t count = 0;
    if (!(in >> key >> model.rounds) || key != "rounds") {
        throw DataError("post-processor model: bad rounds line");
    }
    if (!(in >> key >> count) || key != "stumps") {
        throw DataError("post-processor model: bad stumps line");
    }
    for (std::size_t i = 0; i < count; ++i) {
        Stump s;
        std::string thr, alpha;
        if (!(in >> s.feature_index >> thr >> s.polarity >> alpha)) {
            throw DataError("post-processor model: truncated stump list");
        }
        if (s.feature_index >= features::kFeatureCount || (s.polarity != 1 && s.polarity != -1)) {
            throw DataError("post-processor model: invalid stump " + std::to_string(i));
        }
        s.threshold = parse_real(thr);
        s.alpha = parse_real(alpha);
        if (!std::isfinite(s.alpha)) {
            throw DataError("post-processor model: non-finite alpha");
        }
        model.stumps.push_back(s);
    }
    return model;
}

AbstainModel AbstainModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return load(in);
}

AbstainModel train_adaboost_abstain(std::span<const features::FeatureVector> x,
                                    std::span<const RhythmLabel> y, std::size_t rounds,
                                    const std::function<void(const RoundLog&)>& on_round) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("train_adaboost_abstain: size mismatch");
    }
    if (rounds == 0) {
        throw std::invalid_argument("train_adaboost_abstain: rounds must be positive");
    }
    const std::vector<int> label = signs_of(y);
    const auto positives = static_cast<std::size_t>(std::count(label.begin(), label.end(), 1));
    if (positives < 2 || label.size() - positives < 2) {
        throw DataError("post-processor training needs at least two N and two O examples");
    }

    const std::size_t n = x.size();
    std::vector<Column> columns(features::kFeatureCount);
    for (std::size_t f = 0; f < columns.size(); ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            if (const Feature& v = x[i][f]) {
                columns[f].present.emplace_back(*v, i);
            } else {
                columns[f].missing.push_back(i);
            }
        }
        std::sort(columns[f].present.begin(), columns[f].present.end());
    }

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    AbstainModel model;
    model.rounds = rounds;

    for (std::size_t round = 0; round < rounds; ++round) {
        Candidate best;
        for (std::size_t f = 0; f < columns.size(); ++f) {
            const Column& col = columns[f];
            if (col.present.empty()) {
                continue;
            }
            double missing_w = 0.0;
            for (std::size_t i : col.missing) {
                missing_w += w[i];
            }
            double present_w = 0.0;
            double err = 0.0;  // polarity +1 at threshold -inf: every present example votes NSR
            for (const auto& [v, i] : col.present) {
                present_w += w[i];
                if (label[i] < 0) {
                    err += w[i];
                }
            }
            double threshold = -std::numeric_limits<double>::infinity();
            std::size_t k = 0;
            while (true) {
                for (int polarity : {1, -1}) {
                    const double e = (polarity > 0 ? err : present_w - err) + 0.5 * missing_w;
                    if (e < best.epsilon) {
                        best.epsilon = e;
                        best.stump = Stump{f, threshold, polarity, 0.0};
                    }
                }
                if (k == col.present.size()) {
                    break;
                }
                // Move the whole group of equal values below the threshold.
                const double value = col.present[k].first;
                while (k < col.present.size() && col.present[k].first == value) {
                    const std::size_t i = col.present[k].second;
                    err += label[i] > 0 ? w[i] : -w[i];
                    ++k;
                }
                if (k == col.present.size()) {
                    break;  // threshold above every value repeats the -inf stump with flipped polarity
                }
                threshold = value + 0.5 * (col.present[k].first - value);
            }
        }
        if (!std::isfinite(best.epsilon)) {
            break;  // every feature missing everywhere
        }

        const double eps = std::clamp(best.epsilon, kEpsilonFloor, 1.0 - kEpsilonFloor);
        Stump stump = best.stump;
        stump.alpha = 0.5 * std::log((1.0 - eps) / eps);

        for (std::size_t i = 0; i < n; ++i) {
            const int h = stump.vote(x[i]);
            if (h != 0) {
                w[i] *= std::exp(-stump.alpha * static_cast<double>(label[i] * h));
            }
        }
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& wi : w) {
            wi /= total;
        }
        model.stumps.push_back(stump);
        if (on_round) {
            on_round(RoundLog{round, stump, eps, std::accumulate(w.begin(), w.end(), 0.0)});
        }
    }
    return model;
}

Prediction predict_abstain(const AbstainModel& model, const features::FeatureVector& x) {
    Prediction p;
    bool any_vote = false;
    for (const Stump& s : model.stumps) {
        const int h = s.vote(x);
        if (h != 0) {
            any_vote = true;
            p.score += s.alpha * static_cast<double>(h);
        }
    }
    if (!any_vote || p.score == 0.0) {
        p.verdict = Verdict::Abstain;
    } else {
        p.verdict = p.score > 0.0 ? Verdict::NSR : Verdict::Other;
    }
    return p;
}

double ErrorSummary::rate() const {
    const std::size_t decided = total - abstained;
    return decided == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(decided);
}

ErrorSummary training_error(const AbstainModel& model, std::span<const features::FeatureVector> x,
                            std::span<const RhythmLabel> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("training_error: size mismatch");
    }
    ErrorSummary s;
    s.total = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Prediction p = predict_abstain(model, x[i]);
        if (p.verdict == Verdict::Abstain) {
            ++s.abstained;
        } else if ((p.verdict == Verdict::NSR) != (sign_of(y[i]) > 0)) {
            ++s.wrong;
        }
    }
    return s;
}

double roc_auc(std::span<const double> scores, std::span<const RhythmLabel> y) {
    if (scores.size() != y.size()) {
        throw std::invalid_argument("roc_auc: size mismatch");
    }
    const std::vector<int> label = signs_of(y);
    const auto pos = static_cast<double>(std::count(label.begin(), label.end(), 1));
    const double neg = static_cast<double>(label.size()) - pos;
    if (pos == 0.0 || neg == 0.0) {
        throw DataError("AUC needs both classes");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of mid-ranks (1-based) of the positive class.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (label[order[t]] > 0) {
                rank_sum += mid_rank;
            }
        }
        i = j;
    }
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double roc_auc(const AbstainModel& model, std::span<const features::FeatureVector> x,
               std::span<const RhythmLabel> y) {
    std::vector<double> scores;
    scores.reserve(x.size());
    for (const auto& v : x) {
        scores.push_back(predict_abstain(model, v).score);
    }
    return roc_auc(scores, y);
}

}  // namespace ecgaf::ensemble
