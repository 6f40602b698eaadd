#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hierpose/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "hierpose_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return json::parse(in);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("cli pipeline: synth -> encode -> decode -> eval round-trips at AP 1.0") {
    TempDir dir;
    CHECK(hierpose::cli::run({"synth", "--seed", "7", "--persons", "3", "--out",
                              dir.file("scene.json")}) == 0);
    CHECK(hierpose::cli::run({"encode", "--in", dir.file("scene.json"), "--scheme", "hm2",
                              "--out", dir.file("targets.hprt")}) == 0);
    CHECK(hierpose::cli::run({"decode", "--in", dir.file("targets.hprt"), "--out",
                              dir.file("results.json")}) == 0);
    CHECK(hierpose::cli::run({"eval", "--results", dir.file("results.json"), "--gt",
                              dir.file("scene.json"), "--out", dir.file("report.json")}) == 0);

    const json report = load_json(dir.file("report.json"));
    for (const char* part : {"body", "foot", "face", "hand", "whole-body", "wholebody-mean"}) {
        CHECK(report["parts"][part]["defined"].get<bool>());
        CHECK(report["parts"][part]["ap"].get<double>() == doctest::Approx(1.0));
        CHECK(report["parts"][part]["ar"].get<double>() == doctest::Approx(1.0));
    }
    CHECK(report["face_box"]["ap"].get<double>() == doctest::Approx(1.0));

    SUBCASE("every artifact carries a manifest") {
        for (const char* name : {"scene.json", "targets.hprt", "results.json", "report.json"})
            CHECK(fs::exists(dir.path / (std::string(name) + ".manifest.json")));
        const json manifest = load_json(dir.file("results.json.manifest.json"));
        CHECK(manifest["command"] == "decode");
        CHECK(manifest["config"]["topk"] == 100);
        CHECK(manifest["inputs"].size() == 1);
    }
    SUBCASE("overlay emits one circle per keypoint") {
        CHECK(hierpose::cli::run({"overlay", "--results", dir.file("results.json"), "--out",
                                  dir.file("overlay.svg")}) == 0);
        const std::string svg = slurp(dir.file("overlay.svg"));
        std::size_t circles = 0, pos = 0;
        while ((pos = svg.find("<circle", pos)) != std::string::npos) {
            ++circles;
            pos += 7;
        }
        CHECK(circles == 3 * 133);
    }
}

TEST_CASE("cli reruns from a manifest byte-identically") {
    TempDir dir;
    CHECK(hierpose::cli::run({"synth", "--seed", "11", "--persons", "2", "--out",
                              dir.file("a.json")}) == 0);
    // feed the manifest back as --config; its values override the flags
    CHECK(hierpose::cli::run({"--config", dir.file("a.json.manifest.json"), "synth", "--seed",
                              "999", "--persons", "9", "--out", dir.file("ignored.json")}) ==
          0);
    CHECK(slurp(dir.file("a.json")) == slurp(dir.file("a.json")));
    // the config override forced out=a.json, seed=11, persons=2 again
    const json manifest = load_json(dir.file("a.json.manifest.json"));
    CHECK(manifest["config"]["seed"] == 11);
    const std::string first = slurp(dir.file("a.json"));
    CHECK(hierpose::cli::run({"--config", dir.file("a.json.manifest.json"), "synth"}) == 0);
    CHECK(slurp(dir.file("a.json")) == first);
}

TEST_CASE("cli gradcheck passes on random tensors") {
    TempDir dir;
    CHECK(hierpose::cli::run({"synth", "--seed", "3", "--persons", "2", "--out",
                              dir.file("scene.json"), "--dump-targets",
                              dir.file("targets.hprt")}) == 0);
    CHECK(hierpose::cli::run({"gradcheck", "--target", dir.file("targets.hprt"), "--out",
                              dir.file("gradcheck.json")}) == 0);
    const json report = load_json(dir.file("gradcheck.json"));
    CHECK(report["pass"].get<bool>());
    REQUIRE(report["branches"].is_array());
    CHECK(report["branches"].size() == 9);
    for (const json& branch : report["branches"]) {
        CHECK(branch["pass"].get<bool>());
        CHECK(branch["analytic_vs_fd_max_rel_err"].get<double>() < 1e-4);
    }
}

TEST_CASE("cli error paths") {
    TempDir dir;
    SUBCASE("unknown command prints usage and exits 1") {
        CHECK(hierpose::cli::run({"frobnicate"}) == 1);
        CHECK(hierpose::cli::run({}) == 1);
    }
    SUBCASE("missing input file exits 2") {
        CHECK(hierpose::cli::run({"decode", "--in", dir.file("absent.hprt")}) == 2);
        CHECK(hierpose::cli::run({"eval", "--results", dir.file("absent.json"), "--gt",
                                  dir.file("absent2.json")}) == 2);
    }
    SUBCASE("validation failures exit 1") {
        CHECK(hierpose::cli::run({"synth", "--seed", "1", "--scheme", "nope", "--out",
                                  dir.file("s.json"), "--dump-targets",
                                  dir.file("t.hprt")}) == 1);
        std::ofstream bad(dir.file("bad.json"));
        bad << "{\"annotations\":[{\"image_id\":1,\"bbox\":[0,0,10,10],"
               "\"keypoints_133\":[1,2,3]}]}";
        bad.close();
        CHECK(hierpose::cli::run({"encode", "--in", dir.file("bad.json"), "--out",
                                  dir.file("t.hprt")}) == 1);
    }
    SUBCASE("config with an unknown key is a validation failure") {
        std::ofstream cfg(dir.file("cfg.json"));
        cfg << "{\"bogus_option\": 3}";
        cfg.close();
        CHECK(hierpose::cli::run({"--config", dir.file("cfg.json"), "synth", "--out",
                                  dir.file("s.json")}) == 1);
    }
}

TEST_CASE("cli bench writes csv and chart") {
    TempDir dir;
    CHECK(hierpose::cli::run({"bench", "--persons", "1,2", "--reps", "30", "--image-size",
                              "256", "--out", dir.file("bench.csv"), "--chart",
                              dir.file("bench.svg")}) == 0);
    const std::string csv = slurp(dir.file("bench.csv"));
    CHECK(csv.find("n_persons,median_ms,p95_ms") == 0);
    const std::string svg = slurp(dir.file("bench.svg"));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}
