#include "ecgaf/ensemble.hpp"
#include "ecgaf/features.hpp"
#include "ecgaf/io.hpp"
#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/nn/train.hpp"
#include "ecgaf/pipeline.hpp"
#include "ecgaf/qrs.hpp"
#include "ecgaf/signal.hpp"
#include "ecgaf/spectrogram.hpp"
#include "ecgaf/sqi.hpp"
#include "ecgaf/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ecgaf;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<fs::path> record_inputs(const fs::path& target) {
    if (fs::is_directory(target)) {
        return io::list_records(target);
    }
    return {target};
}

EcgRecord conditioned(const EcgRecord& r) {
    EcgRecord out = r;
    out.samples = signal::remove_baseline(r.samples, r.sampling_rate);
    return out;
}

std::string fixed3(const Feature& f) {
    if (!f) {
        return "NA";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *f);
    return buf;
}

std::string shortest(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nn::ModelKind parse_kind(const std::string& s) {
    try {
        return nn::model_kind_from_string(s);
    } catch (const std::exception&) {
        throw UsageError("--kind must be main or secondary");
    }
}

void cmd_qrs(const fs::path& rec, const std::string& detector) {
    const EcgRecord r = conditioned(io::read_record(rec));
    const auto peaks = detector == "fd" ? qrs::detect_filtered_derivative(r.samples, r.sampling_rate)
                                        : qrs::detect_pan_tompkins(r.samples, r.sampling_rate);
    for (std::size_t p : peaks) {
        std::cout << p << '\n';
    }
}

void cmd_sqi(const fs::path& rec) {
    const EcgRecord r = conditioned(io::read_record(rec));
    const auto pt = qrs::detect_pan_tompkins(r.samples, r.sampling_rate);
    const auto fd = qrs::detect_filtered_derivative(r.samples, r.sampling_rate);
    const Feature t = sqi::template_match_sqi(r.samples, r.sampling_rate, pt);
    std::cout << "id,template_sqi,bsqi\n"
              << r.id << ',' << (t ? shortest(*t) : "") << ',' << shortest(sqi::bsqi(pt, fd, r.sampling_rate))
              << '\n';
}

void cmd_spectrogram(const fs::path& rec, const fs::path& out, const std::string& kind_name) {
    const EcgRecord raw = io::read_record(rec);
    const nn::ModelKind kind = parse_kind(kind_name);
    const std::size_t width = kind == nn::ModelKind::Main ? spectrogram::kMainWidth : spectrogram::kSecondaryWidth;
    const auto segments = pipeline::record_segments(raw, width);
    nlohmann::json j;
    j["id"] = raw.id;
    j["kind"] = nn::to_string(kind);
    j["rows"] = segments.front().rows;
    j["cols"] = segments.front().cols;
    j["segments"] = nlohmann::json::array();
    for (const Matrix& m : segments) {
        j["segments"].push_back(m.data);
    }
    io::write_text(j.dump() + '\n', out);
    std::cout << raw.id << ": " << segments.size() << " segments -> " << out.string() << '\n';
}

void cmd_features(const fs::path& target, const std::optional<fs::path>& out) {
    std::string text = features::csv_header() + '\n';
    for (const auto& path : record_inputs(target)) {
        const EcgRecord r = io::read_record(path);
        text += features::csv_row(r.id, pipeline::record_features(r)) + '\n';
    }
    if (out) {
        io::write_text(text, *out);
    } else {
        std::cout << text;
    }
}

struct TrainCnnArgs {
    fs::path labels;
    fs::path dir;
    std::string kind = "main";
    std::size_t epochs = nn::kMaxEpochs;
    std::size_t batch_size = 16;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    std::optional<fs::path> warm_start;
    fs::path out;
};

void cmd_train_cnn(const TrainCnnArgs& a) {
    const nn::ModelKind kind = parse_kind(a.kind);
    if (a.epochs == 0 || a.epochs > nn::kMaxEpochs) {
        throw UsageError("--epochs must be in [1, 15]");
    }
    nn::DenseNet model = nn::build_model(kind, a.seed);
    const std::size_t width = model.config().input_cols;
    std::vector<nn::LabeledSegment> data;
    for (const auto& [id, label] : io::read_labels(a.labels)) {
        const EcgRecord r = io::read_record(a.dir / (id + ".hea"));
        if (kind == nn::ModelKind::Main && r.duration_seconds() < pipeline::PipelineConfig{}.main_seconds) {
            std::cerr << "skipping " << id << ": shorter than the main-model window\n";
            continue;
        }
        for (Matrix& m : pipeline::record_segments(r, width)) {
            data.push_back({std::move(m), label_index(label)});
        }
    }
    if (data.empty()) {
        throw DataError("no training segments");
    }
    std::optional<nn::DenseNet> donor;
    nn::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.learning_rate = a.learning_rate;
    cfg.seed = a.seed;
    if (a.warm_start) {
        donor.emplace(nn::DenseNet::load(*a.warm_start));
        cfg.warm_start = &*donor;
    }
    nn::train(model, data, cfg, [](const nn::EpochLog& log) {
        std::cerr << "epoch " << log.epoch + 1 << " lr " << log.learning_rate << " loss " << log.mean_loss
                  << " train-acc " << log.eval_accuracy << '\n';
    });
    model.save(a.out);
    std::cout << "trained " << nn::to_string(kind) << " on " << data.size() << " segments -> " << a.out.string()
              << '\n';
}

void cmd_train_post(const fs::path& features_csv, const fs::path& labels_path, std::size_t rounds,
                    const fs::path& out) {
    const auto table = features::parse_csv(io::read_text(features_csv));
    std::map<std::string, RhythmLabel> truth;
    for (const auto& [id, label] : io::read_labels(labels_path)) {
        truth.emplace(id, label);
    }
    std::vector<features::FeatureVector> x;
    std::vector<RhythmLabel> y;
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        const auto it = truth.find(table.ids[i]);
        if (it == truth.end()) {
            std::cerr << "no label for " << table.ids[i] << "; skipped\n";
            continue;
        }
        if (it->second == RhythmLabel::Normal || it->second == RhythmLabel::Other) {
            x.push_back(table.rows[i]);
            y.push_back(it->second);
        }
    }
    const auto model = ensemble::train_adaboost_abstain(x, y, rounds);
    model.save(out);
    std::cout << "post-processor: " << model.stumps.size() << " stumps, " << model.selected_features().size()
              << " distinct features, train AUC " << ensemble::roc_auc(model, x, y) << " -> " << out.string()
              << '\n';
}

void cmd_classify(const fs::path& target, const fs::path& main_path, const fs::path& secondary_path,
                  const fs::path& post_path, bool trace) {
    const nn::DenseNet main_model = nn::DenseNet::load(main_path);
    const nn::DenseNet secondary_model = nn::DenseNet::load(secondary_path);
    const ensemble::AbstainModel post_model = ensemble::AbstainModel::load(post_path);
    const pipeline::DenseNetClassifier main(main_model), secondary(secondary_model);
    const pipeline::AbstainPostProcessor post(post_model);

    std::vector<std::pair<std::string, char>> rows;
    for (const auto& path : record_inputs(target)) {
        const EcgRecord r = io::read_record(path);
        const auto result = pipeline::classify_record(r, main, secondary, post);
        if (trace) {
            const auto& t = result.trace;
            std::cerr << r.id << ": " << pipeline::to_string(t.branch) << " pt=" << t.pt_peaks
                      << " fd=" << t.fd_peaks << " sqi=";
            if (t.sqi) {
                std::cerr << *t.sqi;
            } else {
                std::cerr << "NA";
            }
            if (result.probabilities) {
                const auto& p = *result.probabilities;
                std::cerr << " model=" << nn::to_string(*t.model) << " segments=" << t.segments << " p=("
                          << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << ')';
            }
            std::cerr << '\n';
        }
        rows.emplace_back(r.id, label_to_char(result.label));
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [id, label] : rows) {
        std::cout << id << ',' << label << '\n';
    }
}

void cmd_score(const fs::path& pred_path, const fs::path& truth_path) {
    std::map<std::string, RhythmLabel> predicted;
    for (const auto& [id, label] : io::read_labels(pred_path)) {
        predicted.emplace(id, label);
    }
    std::vector<RhythmLabel> pred, truth;
    for (const auto& [id, label] : io::read_labels(truth_path)) {
        const auto it = predicted.find(id);
        if (it == predicted.end()) {
            throw DataError("no prediction for " + id);
        }
        pred.push_back(it->second);
        truth.push_back(label);
    }
    if (truth.empty()) {
        throw DataError("truth file is empty");
    }
    const auto report = pipeline::evaluate_f1(pred, truth);
    for (const auto& w : report.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    std::cout << fixed3(report.per_class[0]) << ',' << fixed3(report.per_class[1]) << ','
              << fixed3(report.per_class[2]) << ',' << fixed3(report.mean) << '\n';
}

void cmd_split(const fs::path& truth_path, std::size_t k, std::uint64_t seed) {
    const auto table = io::read_labels(truth_path);
    std::vector<RhythmLabel> labels;
    for (const auto& row : table) {
        labels.push_back(row.second);
    }
    const auto folds = pipeline::stratified_kfold(labels, k, seed);
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::cout << table[i].first << ',' << folds[i] << '\n';
    }
}

struct SynthArgs {
    synth::SynthOptions opt;
    bool pure_noise = false;
    fs::path out;
};

void cmd_synth(SynthArgs a) {
    if (a.out.extension() != ".hea") {
        a.out += ".hea";
    }
    if (a.opt.id.empty() || a.opt.id == "synth") {
        a.opt.id = a.out.stem().string();
    }
    fs::path peaks_path = a.out;
    peaks_path.replace_extension(".peaks");
    if (a.pure_noise) {
        if (!(a.opt.noise_sd > 0.0)) {
            throw UsageError("--pure-noise needs --noise > 0");
        }
        io::write_record(synth::white_noise(a.opt.duration_s, a.opt.fs, a.opt.noise_sd, a.opt.seed, a.opt.id), a.out);
        io::write_peaks({}, peaks_path);
    } else {
        const auto s = synth::synth_ecg(a.opt);
        io::write_record(s.record, a.out);
        io::write_peaks(s.peaks, peaks_path);
    }
    std::cout << a.out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ecgaf: single-lead ECG rhythm classification toolkit"};
    app.require_subcommand(1);

    fs::path rec, out, labels, dir, main_path, secondary_path, post_path, pred, truth;
    std::optional<fs::path> features_out;
    std::string detector = "pt";
    std::string kind = "main";

    auto* qrs_cmd = app.add_subcommand("qrs", "Print R-peak sample indices");
    qrs_cmd->add_option("record", rec, "Record header (.hea)")->required()->check(CLI::ExistingFile);
    qrs_cmd->add_option("--detector", detector, "pt (Pan-Tompkins) or fd (filtered derivative)")
        ->check(CLI::IsMember({"pt", "fd"}));

    auto* sqi_cmd = app.add_subcommand("sqi", "Print template SQI and bSQI");
    sqi_cmd->add_option("record", rec, "Record header (.hea)")->required()->check(CLI::ExistingFile);

    auto* spec_cmd = app.add_subcommand("spectrogram", "Dump model-input spectrogram segments as JSON");
    spec_cmd->add_option("record", rec, "Record header (.hea)")->required()->check(CLI::ExistingFile);
    spec_cmd->add_option("--out", out, "Output JSON file")->required();
    spec_cmd->add_option("--kind", kind, "main (375 frames) or secondary (225 frames)");

    auto* feat_cmd = app.add_subcommand("features", "Print the 437-feature CSV row(s)");
    feat_cmd->add_option("target", rec, "Record header or directory of records")->required()->check(CLI::ExistingPath);
    feat_cmd->add_option("--out", features_out, "Write CSV here instead of standard output");

    TrainCnnArgs tc;
    auto* tc_cmd = app.add_subcommand("train-cnn", "Train a spectrogram DenseNet");
    tc_cmd->add_option("labels", tc.labels, "Label CSV (id,label)")->required()->check(CLI::ExistingFile);
    tc_cmd->add_option("dir", tc.dir, "Directory holding <id>.hea/.dat")->required()->check(CLI::ExistingDirectory);
    tc_cmd->add_option("--kind", tc.kind, "main or secondary");
    tc_cmd->add_option("--epochs", tc.epochs, "Epochs (1-15)");
    tc_cmd->add_option("--batch-size", tc.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    tc_cmd->add_option("--lr", tc.learning_rate, "Initial learning rate")->check(CLI::NonNegativeNumber);
    tc_cmd->add_option("--seed", tc.seed, "Initialization and shuffle seed");
    tc_cmd->add_option("--warm-start", tc.warm_start, "Initialize from this model file")->check(CLI::ExistingFile);
    tc_cmd->add_option("--out", tc.out, "Output model file")->required();

    std::size_t rounds = ensemble::kDefaultRounds;
    auto* tp_cmd = app.add_subcommand("train-post", "Train the NSR/O AdaBoost-abstain post-processor");
    tp_cmd->add_option("features", rec, "Feature CSV from `features`")->required()->check(CLI::ExistingFile);
    tp_cmd->add_option("--labels", labels, "Label CSV (id,label)")->required()->check(CLI::ExistingFile);
    tp_cmd->add_option("--rounds", rounds, "Boosting rounds")->check(CLI::PositiveNumber);
    tp_cmd->add_option("--out", out, "Output model file")->required();

    auto* cl_cmd = app.add_subcommand("classify", "Classify a record or directory; prints id,label");
    cl_cmd->add_option("target", rec, "Record header or directory of records")->required()->check(CLI::ExistingPath);
    cl_cmd->add_option("--main", main_path, "Main model file")->required()->check(CLI::ExistingFile);
    cl_cmd->add_option("--secondary", secondary_path, "Secondary model file")->required()->check(CLI::ExistingFile);
    cl_cmd->add_option("--post", post_path, "Post-processor model file")->required()->check(CLI::ExistingFile);
    bool trace = false;
    cl_cmd->add_flag("--trace", trace, "Print the routing trace of each record to standard error");

    auto* score_cmd = app.add_subcommand("score", "Print F1n,F1a,F1o,mean");
    score_cmd->add_option("predictions", pred, "Predicted labels CSV")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("truth", truth, "Reference labels CSV")->required()->check(CLI::ExistingFile);

    std::size_t k = 5;
    std::uint64_t seed = 0;
    auto* split_cmd = app.add_subcommand("split", "Stratified k-fold assignment; prints id,fold");
    split_cmd->add_option("truth", truth, "Labels CSV")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--k", k, "Number of folds")->check(CLI::Range(2, 1000));
    split_cmd->add_option("--seed", seed, "Shuffle seed");

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic record plus a .peaks sidecar");
    synth_cmd->add_option("--bpm", sa.opt.bpm, "Heart rate")->check(CLI::Range(30.0, 300.0));
    synth_cmd->add_option("--seconds", sa.opt.duration_s, "Duration")->check(CLI::Range(1.0, 3600.0));
    synth_cmd->add_option("--fs", sa.opt.fs, "Sampling rate")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--noise", sa.opt.noise_sd, "Noise SD in mV")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--jitter", sa.opt.rr_jitter, "Relative RR jitter")->check(CLI::Range(0.0, 0.9));
    synth_cmd->add_flag("--wander", sa.opt.baseline_wander, "Add 0.3 Hz baseline wander");
    synth_cmd->add_flag("--pure-noise", sa.pure_noise, "White noise only, no beats");
    synth_cmd->add_option("--seed", sa.opt.seed, "Noise seed");
    synth_cmd->add_option("--id", sa.opt.id, "Record id (defaults to the file stem)");
    synth_cmd->add_option("--out", sa.out, "Output header path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0) {
            std::cerr << app.help();
            return 1;
        }
        return 0;
    }

    try {
        if (*qrs_cmd) {
            cmd_qrs(rec, detector);
        } else if (*sqi_cmd) {
            cmd_sqi(rec);
        } else if (*spec_cmd) {
            cmd_spectrogram(rec, out, kind);
        } else if (*feat_cmd) {
            cmd_features(rec, features_out);
        } else if (*tc_cmd) {
            cmd_train_cnn(tc);
        } else if (*tp_cmd) {
            cmd_train_post(rec, labels, rounds, out);
        } else if (*cl_cmd) {
            cmd_classify(rec, main_path, secondary_path, post_path, trace);
        } else if (*score_cmd) {
            cmd_score(pred, truth);
        } else if (*split_cmd) {
            cmd_split(truth, k, seed);
        } else if (*synth_cmd) {
            cmd_synth(sa);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
