#include "ecgaf/io.hpp"
#include "ecgaf/synth.hpp"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace ecgaf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("ecgaf_io_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_raw(const fs::path& header, const std::string& head, const std::vector<std::int16_t>& data) {
    std::ofstream(header) << head << "\n";
    std::ofstream dat(io::data_path_for(header), std::ios::binary);
    for (std::int16_t v : data) {
        const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>((static_cast<std::uint16_t>(v) >> 8) & 0xff)};
        dat.write(reinterpret_cast<const char*>(b), 2);
    }
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("gain scaling on read") {
    TempDir tmp;
    const fs::path h = tmp.path / "rec1.hea";
    write_raw(h, "rec1 300 3 1000", {1000, -1000, 0});
    const EcgRecord r = io::read_record(h);
    CHECK(r.id == "rec1");
    CHECK(r.sampling_rate == 300.0);
    CHECK(r.samples == std::vector<double>{1.0, -1.0, 0.0});
}

TEST_CASE("header problems have distinct messages") {
    TempDir tmp;
    const fs::path h = tmp.path / "bad.hea";
    write_raw(h, "bad 300 5 1000", {1, 2, 3});
    CHECK_THROWS_WITH_AS(io::read_record(h), doctest::Contains("length mismatch"), DataError);
    write_raw(h, "bad 300 3 0", {1, 2, 3});
    CHECK_THROWS_WITH_AS(io::read_record(h), doctest::Contains("bad gain"), DataError);
    write_raw(h, "bad three", {1, 2, 3});
    CHECK_THROWS_WITH_AS(io::read_record(h), doctest::Contains("malformed header"), DataError);
    CHECK_THROWS_AS(io::read_record(tmp.path / "missing.hea"), DataError);
}

TEST_CASE("records round-trip exactly at the stored precision") {
    TempDir tmp;
    EcgRecord r;
    r.id = "rt";
    r.sampling_rate = 250.0;
    r.samples = {0.001, -0.25, 3.5, 0.0, -32.768};
    const fs::path h = tmp.path / "rt.hea";
    io::write_record(r, h);
    const EcgRecord back = io::read_record(h);
    CHECK(back.id == r.id);
    CHECK(back.sampling_rate == r.sampling_rate);
    CHECK(back.samples == r.samples);

    io::write_record(back, h);
    CHECK(io::read_record(h).samples == back.samples);
}

TEST_CASE("out-of-range samples are refused") {
    TempDir tmp;
    EcgRecord r;
    r.id = "big";
    r.samples = {40.0};
    CHECK_THROWS_AS(io::write_record(r, tmp.path / "big.hea"), DataError);
}

TEST_CASE("directory listing is sorted") {
    TempDir tmp;
    for (const char* id : {"b", "a", "c"}) {
        EcgRecord r;
        r.id = id;
        r.samples = {0.0, 0.1};
        io::write_record(r, tmp.path / (std::string(id) + ".hea"));
    }
    const auto list = io::list_records(tmp.path);
    REQUIRE(list.size() == 3);
    CHECK(list[0].stem() == "a");
    CHECK(list[2].stem() == "c");
}

TEST_CASE("label tables") {
    TempDir tmp;
    const io::LabelTable t{{"A0001", RhythmLabel::Normal}, {"A0002", RhythmLabel::Noisy}};
    io::write_labels(t, tmp.path / "l.csv");
    CHECK(io::read_labels(tmp.path / "l.csv") == t);
    CHECK(io::format_labels(t) == "A0001,N\nA0002,~\n");

    io::write_text("x,N\nx,O\n", tmp.path / "dup.csv");
    CHECK_THROWS_AS(io::read_labels(tmp.path / "dup.csv"), DataError);
    io::write_text("x,Q\n", tmp.path / "bad.csv");
    CHECK_THROWS_AS(io::read_labels(tmp.path / "bad.csv"), DataError);
}

TEST_CASE("peak sidecars") {
    TempDir tmp;
    const std::vector<std::size_t> p{3, 250, 9000};
    io::write_peaks(p, tmp.path / "p.peaks");
    CHECK(io::read_peaks(tmp.path / "p.peaks") == p);
}

}

TEST_SUITE("synth") {

TEST_CASE("75 bpm beats are 240 samples apart") {
    const auto s = synth::synth_ecg({.bpm = 75, .duration_s = 10});
    CHECK(s.peaks.size() >= 12);
    CHECK(s.peaks.size() <= 13);
    for (std::size_t i = 1; i < s.peaks.size(); ++i) {
        CHECK(s.peaks[i] - s.peaks[i - 1] == 240);
    }
    CHECK(s.record.samples.size() == 3000);
}

TEST_CASE("noise-free output ignores the seed") {
    CHECK(synth::synth_ecg({.seed = 1}).record.samples == synth::synth_ecg({.seed = 2}).record.samples);
}

TEST_CASE("same seed reproduces noise bit for bit") {
    const synth::SynthOptions o{.noise_sd = 0.1, .seed = 5, .baseline_wander = true, .rr_jitter = 0.2};
    CHECK(synth::synth_ecg(o).record.samples == synth::synth_ecg(o).record.samples);
    CHECK(synth::synth_ecg(o).peaks == synth::synth_ecg(o).peaks);
    CHECK(synth::white_noise(2.0, 300.0, 1.0, 3).samples == synth::white_noise(2.0, 300.0, 1.0, 3).samples);
}

}
