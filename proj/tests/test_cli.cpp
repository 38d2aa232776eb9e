#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <map>
#include <sstream>

#include "json.hpp"
#include "test_support.hpp"

#include "avprof/cli.hpp"

using namespace avprof;
using nlohmann::json;
using testing::TempDir;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[std::filesystem::relative(e.path(), root).string()] = testing::read_file(e.path());
    }
    return files;
}

json read_json(const std::filesystem::path& p) { return json::parse(testing::read_file(p)); }

std::string synth_into(const TempDir& tmp, const std::string& name = "data") {
    const std::string dir = (tmp / name).string();
    const auto r = run({"synth", "--per-class", "10", "--T", "40", "--seed", "5", "--out", dir});
    REQUIRE(r.code == kExitOk);
    return dir;
}

const std::vector<std::string> kTinyRfGrid{"--rf-trees", "5",  "--rf-min-leaf", "1",     "--rf-criterion",
                                           "gini",       "--rf-max-features", "sqrt"};

}  // namespace

TEST_CASE("synth output is byte-identical for identical seeds") {
    TempDir tmp("cli_synth");
    const auto a = run({"synth", "--per-class", "3", "--T", "20", "--seed", "9", "--out", (tmp / "a").string()});
    const auto b = run({"synth", "--per-class", "3", "--T", "20", "--seed", "9", "--out", (tmp / "b").string()});
    REQUIRE(a.code == kExitOk);
    REQUIRE(b.code == kExitOk);
    const auto ta = tree_contents(tmp / "a");
    CHECK(ta.size() == 6 * 2 + 1);
    CHECK(ta == tree_contents(tmp / "b"));
    const auto manifest = read_json(tmp / "a" / "manifest.json");
    CHECK(manifest.at("count") == 6);
    CHECK(manifest.at("run_config").at("seed") == 9);

    CHECK(run({"synth", "--per-class", "3", "--T", "20", "--seed", "9", "--out", (tmp / "a").string()}).code ==
          kExitRuntime);
    CHECK(run({"synth", "--per-class", "3", "--T", "20", "--seed", "9", "--force", "--out", (tmp / "a").string()})
              .code == kExitOk);
}

TEST_CASE("exit codes distinguish configuration from runtime failures") {
    TempDir tmp("cli_codes");
    CHECK(run({}).code == kExitConfig);
    CHECK(run({"frobnicate"}).code == kExitConfig);
    CHECK(run({"synth", "--per-class", "0", "--out", (tmp / "x").string()}).code == kExitConfig);
    CHECK(run({"synth", "--bogus"}).code == kExitConfig);
    CHECK(run({"classify", "--data", (tmp / "nothing").string(), "--family", "svm", "--window", "10"}).code ==
          kExitConfig);
    CHECK(run({"degrade", "--data", (tmp / "nothing").string(), "--window", "10", "--drop-rates", "1.2"}).code ==
          kExitConfig);
    CHECK(run({"ingest", "--input", (tmp / "nothing").string()}).code == kExitConfig);
    const auto missing = run({"classify", "--data", (tmp / "nothing").string(), "--window", "10", "--out",
                              (tmp / "o").string()});
    CHECK(missing.code == kExitRuntime);
    CHECK(missing.err.find("error") != std::string::npos);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("flags override environment, which overrides the config file") {
    TempDir tmp("cli_precedence");
    testing::write_file(tmp / "cfg.json", R"({"seed": 11, "per_class": 2, "T": 10})");
    const std::string cfg = (tmp / "cfg.json").string();

    REQUIRE(run({"synth", "--config", cfg, "--out", (tmp / "a").string()}).code == kExitOk);
    CHECK(read_json(tmp / "a" / "manifest.json").at("run_config").at("seed") == 11);
    CHECK(read_json(tmp / "a" / "manifest.json").at("count") == 4);

    ::setenv("AVPROF_SEED", "12", 1);
    REQUIRE(run({"synth", "--config", cfg, "--out", (tmp / "b").string()}).code == kExitOk);
    CHECK(read_json(tmp / "b" / "manifest.json").at("run_config").at("seed") == 12);
    REQUIRE(run({"synth", "--config", cfg, "--seed", "13", "--out", (tmp / "c").string()}).code == kExitOk);
    CHECK(read_json(tmp / "c" / "manifest.json").at("run_config").at("seed") == 13);
    ::unsetenv("AVPROF_SEED");

    testing::write_file(tmp / "bad.json", R"({"sead": 1})");
    CHECK(run({"synth", "--config", (tmp / "bad.json").string(), "--out", (tmp / "d").string()}).code == kExitConfig);
}

TEST_CASE("detect writes a forward-filled series") {
    TempDir tmp("cli_detect");
    testing::write_file(tmp / "c.jsonl",
                        R"({"frame": 0, "candidates": [{"box": [1,2,3,4], "class": "car", "conf": 0.95, "emb": [0, 1]}, )"
                        R"({"box": [9,9,9,9], "class": "car", "conf": 0.99, "emb": [5, 5]}]})"
                        "\n"
                        R"({"frame": 1, "candidates": [{"box": [7,7,7,7], "class": "truck", "conf": 0.99, "emb": [0, 1]}]})"
                        "\n"
                        R"({"frame": 2, "candidates": [{"box": [5,6,7,8], "class": "car", "conf": 0.90, "emb": [0, 0.9]}]})"
                        "\n");
    testing::write_file(tmp / "t.json", R"({"condition": "day", "embeddings": [[0, 1]]})");
    const auto r = run({"detect", "--candidates", (tmp / "c.jsonl").string(), "--templates", (tmp / "t.json").string(),
                        "--out", (tmp / "o").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(testing::read_file(tmp / "o" / "detections.csv") ==
          "frame,selected,cx,cy,h,w\n0,0,1,2,3,4\n1,,1,2,3,4\n2,0,5,6,7,8\n");
    const auto report = read_json(tmp / "o" / "detect_report.json");
    CHECK(report.at("status") == "ok");
    CHECK(report.at("filled_frames") == 1);

    testing::write_file(tmp / "none.jsonl", R"({"frame": 0, "candidates": []})"
                                            "\n");
    const auto bad = run({"detect", "--candidates", (tmp / "none.jsonl").string(), "--templates",
                          (tmp / "t.json").string(), "--out", (tmp / "e").string()});
    CHECK(bad.code == kExitRuntime);
    CHECK(read_json(tmp / "e" / "detect_report.json").at("status") == "error");
}

TEST_CASE("ingest of an empty archive succeeds with a warning") {
    TempDir tmp("cli_ingest");
    std::filesystem::create_directories(tmp / "archive");
    json map{{"meta_file", "meta.json"},
             {"series_file", "series.csv"},
             {"columns",
              {{"t", "t"},
               {"range_m", "range_m"},
               {"speed_mps", "speed_mps"},
               {"accel_mps2", "accel_mps2"},
               {"lane_offset_m", "lane_offset_m"},
               {"yaw_rad", "yaw_rad"},
               {"det_cx", "det_cx"},
               {"det_cy", "det_cy"},
               {"det_h", "det_h"},
               {"det_w", "det_w"}}}};
    testing::write_file(tmp / "map.json", map.dump());
    const auto r = run({"ingest", "--input", (tmp / "archive").string(), "--column-map", (tmp / "map.json").string(),
                        "--out", (tmp / "o").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("warning") != std::string::npos);
    const auto manifest = read_json(tmp / "o" / "manifest.json");
    CHECK(manifest.at("count") == 0);
    CHECK(manifest.at("warnings").size() == 1);
}

TEST_CASE("classify writes one JSON and one CSV per combination") {
    TempDir tmp("cli_classify");
    const auto data = synth_into(tmp);
    std::vector<std::string> args{"classify", "--data", data, "--kind", "S,D", "--window", "10", "--stride", "5",
                                  "--repeats", "1", "--folds", "3", "--out", (tmp / "o").string()};
    args.insert(args.end(), kTinyRfGrid.begin(), kTinyRfGrid.end());
    const auto r = run(args);
    REQUIRE(r.code == kExitOk);
    const auto files = tree_contents(tmp / "o");
    CHECK(files.size() == 4);
    CHECK(files.count("classify-rf-S-W10.json") == 1);
    CHECK(files.count("classify-rf-D-W10.csv") == 1);
    const auto doc = json::parse(files.at("classify-rf-S-W10.json"));
    CHECK(doc.at("command") == "classify");
    CHECK_FALSE(doc.at("run_config").contains("jobs"));
    CHECK_FALSE(doc.at("run_config").contains("out"));
    CHECK(doc.at("repeats").size() == 1);

    args.back() = "log2";
    args[args.size() - 9] = (tmp / "o2").string();
    args.push_back("--jobs");
    args.push_back("2");
    REQUIRE(run(args).code == kExitOk);
    CHECK(tree_contents(tmp / "o2").size() == 4);
}

TEST_CASE("autoregress records skipped cells and the class table") {
    TempDir tmp("cli_ar");
    const auto data = synth_into(tmp);
    const auto r = run({"autoregress", "--data", data, "--histories", "1,15", "--horizons", "2,8", "--window", "20",
                        "--stride", "5", "--repeats", "2", "--max-epochs", "3", "--out", (tmp / "o").string()});
    REQUIRE(r.code == kExitOk);
    const auto doc = read_json(tmp / "o" / "autoregress.json");
    CHECK(doc.at("cells").size() == 4);
    CHECK(doc.at("cells")[3].at("status") == "skipped");
    const auto table = testing::read_file(tmp / "o" / "class_comparison.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 2 * 3);
    CHECK(std::filesystem::exists(tmp / "o" / "autoregress.csv"));
}
