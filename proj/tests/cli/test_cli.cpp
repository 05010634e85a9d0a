#include "ecgaf/ensemble.hpp"
#include "ecgaf/io.hpp"
#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/qrs.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

using namespace ecgaf;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

class Workspace {
public:
    Workspace() {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("ecgaf_cli_" + std::to_string(rd()));
        fs::create_directories(dir_);
    }
    ~Workspace() { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    Run run(const std::string& args) const {
        const fs::path out = path(".stdout"), err = path(".stderr");
        const std::string cmd = "cd '" + dir_.string() + "' && '" ECGAF_CLI_PATH "' " + args + " >'" +
                                out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = io::read_text(out);
        r.err = io::read_text(err);
        return r;
    }

private:
    fs::path dir_;
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("score of a file against itself is perfect") {
    Workspace ws;
    io::write_text("a,N\nb,A\nc,O\nd,~\n", ws.path("truth.csv"));
    const Run r = ws.run("score truth.csv truth.csv");
    CHECK(r.code == 0);
    CHECK(r.out == "1.000,1.000,1.000,1.000\n");
}

TEST_CASE("absent class is reported as NA with a warning") {
    Workspace ws;
    io::write_text("a,N\nb,O\n", ws.path("truth.csv"));
    const Run r = ws.run("score truth.csv truth.csv");
    CHECK(r.code == 0);
    CHECK(r.out == "1.000,NA,1.000,1.000\n");
    CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with help on stderr") {
    Workspace ws;
    const Run unknown = ws.run("frobnicate");
    CHECK(unknown.code == 1);
    CHECK(unknown.out.empty());
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(ws.run("").code == 1);
    CHECK(ws.run("qrs does-not-exist.hea").code == 1);
}

TEST_CASE("data errors exit 2") {
    Workspace ws;
    io::write_text("a,N\nb,N\n", ws.path("labels.csv"));
    const Run split = ws.run("split labels.csv --k 5");
    CHECK(split.code == 2);
    CHECK_FALSE(split.err.empty());

    io::write_text("broken 300 10 1000\n", ws.path("broken.hea"));
    io::write_text("xx", ws.path("broken.dat"));
    const Run qrs = ws.run("qrs broken.hea");
    CHECK(qrs.code == 2);
    CHECK(qrs.err.find("length mismatch") != std::string::npos);
}

TEST_CASE("synth writes a record and its true peaks; qrs finds them") {
    Workspace ws;
    const Run s = ws.run("synth --bpm 80 --seconds 12 --noise 0.02 --seed 4 --out beat.hea");
    REQUIRE(s.code == 0);
    const EcgRecord r = io::read_record(ws.path("beat.hea"));
    CHECK(r.id == "beat");
    CHECK(r.samples.size() == 3600);
    const auto truth = io::read_peaks(ws.path("beat.peaks"));

    const Run q = ws.run("qrs beat.hea");
    REQUIRE(q.code == 0);
    std::istringstream in(q.out);
    std::vector<std::size_t> found;
    for (std::size_t v; in >> v;) {
        found.push_back(v);
    }
    CHECK(qrs::count_matches(truth, found, 45) + 1 >= truth.size());
    CHECK(found.size() <= truth.size());

    const Run fd = ws.run("qrs beat.hea --detector fd");
    CHECK(fd.code == 0);

    const Run sq = ws.run("sqi beat.hea");
    REQUIRE(sq.code == 0);
    CHECK(sq.out.rfind("id,template_sqi,bsqi\nbeat,", 0) == 0);
}

TEST_CASE("features, split and spectrogram") {
    Workspace ws;
    REQUIRE(ws.run("synth --seconds 10 --out a.hea").code == 0);
    const Run f = ws.run("features a.hea");
    REQUIRE(f.code == 0);
    const auto table = features::parse_csv(f.out);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.ids[0] == "a");

    const Run sp = ws.run("spectrogram a.hea --kind secondary --out spec.json");
    CHECK(sp.code == 0);
    CHECK(fs::file_size(ws.path("spec.json")) > 0);

    std::string labels;
    for (int i = 0; i < 10; ++i) {
        labels += "r" + std::to_string(i) + (i % 2 ? ",N\n" : ",O\n");
    }
    io::write_text(labels, ws.path("labels.csv"));
    const Run a = ws.run("split labels.csv --k 5 --seed 3");
    const Run b = ws.run("split labels.csv --k 5 --seed 3");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 10);
}

TEST_CASE("noise record is classified as noisy end to end") {
    Workspace ws;
    nn::DenseNet(testing::reduced_config(375), 1).save(ws.path("main.model"));
    nn::DenseNet(testing::reduced_config(225), 2).save(ws.path("sec.model"));
    const auto post = testing::separable_features(20, 0.0, 1);
    ensemble::train_adaboost_abstain(post.x, post.y, 3).save(ws.path("post.model"));

    REQUIRE(ws.run("synth --pure-noise --noise 1 --seconds 30 --seed 6 --out hiss.hea").code == 0);
    const std::string cmd = "classify hiss.hea --main main.model --secondary sec.model --post post.model";
    const Run c = ws.run(cmd);
    CHECK(c.code == 0);
    CHECK(c.out == "hiss,~\n");
    CHECK(ws.run(cmd).out == c.out);

    const Run traced = ws.run(cmd + " --trace");
    CHECK(traced.err.find("noise-by-sqi") != std::string::npos);
}

TEST_CASE("training commands produce loadable models") {
    Workspace ws;
    fs::create_directories(ws.path("recs"));
    std::string labels;
    const char* cls[] = {"N", "O", "N", "O"};
    for (int i = 0; i < 4; ++i) {
        const std::string id = "r" + std::to_string(i);
        const std::string jitter = i % 2 ? " --jitter 0.3" : "";
        REQUIRE(ws.run("synth --seconds 10 --bpm " + std::to_string(60 + 15 * i) + jitter + " --seed " +
                       std::to_string(i) + " --out recs/" + id + ".hea").code == 0);
        labels += id + "," + cls[i] + "\n";
    }
    io::write_text(labels, ws.path("labels.csv"));

    const Run tc = ws.run("train-cnn labels.csv recs --kind secondary --epochs 1 --batch-size 16 --seed 1 --out sec.model");
    REQUIRE(tc.code == 0);
    CHECK(nn::DenseNet::load(ws.path("sec.model")).config().kind == nn::ModelKind::Secondary);

    REQUIRE(ws.run("features recs --out feats.csv").code == 0);
    const Run tp = ws.run("train-post feats.csv --labels labels.csv --rounds 4 --out post.model");
    REQUIRE(tp.code == 0);
    const auto post = ensemble::AbstainModel::load(ws.path("post.model"));
    CHECK(post.rounds == 4);

    const Run c = ws.run("classify recs --main sec.model --secondary sec.model --post post.model");
    CHECK(c.code == 0);
    CHECK(std::count(c.out.begin(), c.out.end(), '\n') == 4);
    CHECK(c.out.rfind("r0,", 0) == 0);
}

}
