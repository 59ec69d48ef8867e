#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eht/commands.hpp"
#include "fixtures.hpp"

using namespace eht;
namespace fs = std::filesystem;

namespace {

nlohmann::json golden_json(const std::string& name) {
    std::ifstream in(eht::testing::config_dir() / (name + ".json"));
    return nlohmann::json::parse(in);
}

std::string pointer_of(const nlohmann::json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<no error>";
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("eht_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_json(const fs::path& dir, const nlohmann::json& doc) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "eht-lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Config, GoldensLoadAndRoundTrip) {
    for (const std::string name : {"stag_hunt", "bos_symmetric", "bos_asymmetric"}) {
        const auto cfg = eht::testing::golden(name);
        EXPECT_EQ(cfg.name, name);
        EXPECT_EQ(cfg.granularity, 4);
        EXPECT_EQ(parse_config(to_json(cfg)), cfg) << name;
    }
    const auto asym = eht::testing::golden("bos_asymmetric");
    EXPECT_DOUBLE_EQ(asym.transforms[1](2.0), 1.9);
}

TEST(Config, ErrorsCarryJsonPointers) {
    auto doc = golden_json("stag_hunt");
    doc["game"]["payoffs"][2] = {3};
    EXPECT_EQ(pointer_of(doc), "/game/payoffs/2");

    doc = golden_json("stag_hunt");
    doc["parameters"]["temperature"] = 1.0;
    EXPECT_EQ(pointer_of(doc), "/parameters/temperature");

    doc = golden_json("stag_hunt");
    doc["run"]["xi"] = 1.0;
    EXPECT_EQ(pointer_of(doc), "/run/xi");

    doc = golden_json("stag_hunt");
    doc["run"]["gamma"] = {0.5};
    EXPECT_EQ(pointer_of(doc), "/run/gamma");

    doc = golden_json("stag_hunt");
    doc["transforms"][0] = {{"kind", "cubic"}};
    EXPECT_EQ(pointer_of(doc), "/transforms/0/kind");
}

TEST(Cli, AnalyzeSucceedsAndWritesArtifacts) {
    const auto dir = scratch("analyze");
    const auto r = cli({"analyze", (eht::testing::config_dir() / "stag_hunt.json").string(), "--out", dir.string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "analysis.json"));
    EXPECT_TRUE(fs::exists(dir / "consistent_states.csv"));
}

TEST(Cli, MissingFileIsAConfigError) {
    EXPECT_EQ(cli({"analyze", "/nonexistent/config.json"}).code, kExitConfig);
    EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
}

TEST(Cli, StateCapGivesCapacityExit) {
    ::setenv("EHT_STATE_CAP", "3", 1);
    const auto r = cli({"analyze", (eht::testing::config_dir() / "stag_hunt.json").string(), "--out",
                        scratch("cap").string()});
    ::unsetenv("EHT_STATE_CAP");
    EXPECT_EQ(r.code, kExitCapacity);
}

TEST(Cli, SweepNeedsTwoGridPoints) {
    const auto dir = scratch("sweep1");
    auto doc = golden_json("stag_hunt");
    doc["run"]["xi_grid"] = {0.1};
    const auto r = cli({"sweep", write_json(dir, doc).string(), "--out", dir.string()});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("/run/xi_grid"), std::string::npos);
}

TEST(Cli, DegenerateVerifyWarnsButSucceeds) {
    const auto dir = scratch("degenerate");
    auto doc = golden_json("stag_hunt");
    doc["game"]["payoffs"] = {{1, 1}, {1, 1}, {1, 1}, {1, 1}};
    const auto r = cli({"verify", write_json(dir, doc).string(), "--out", dir.string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("WARN"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, NonPositiveTransformIsRejected) {
    const auto dir = scratch("transform");
    auto doc = golden_json("stag_hunt");
    doc["transforms"][1] = {{"kind", "affine"}, {"scale", 1.0}, {"shift", -5.0}};
    const auto r = cli({"analyze", write_json(dir, doc).string(), "--out", dir.string()});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("/transforms/1"), std::string::npos);
}

TEST(Cli, SimulationIsByteReproducible) {
    const auto dir = scratch("simulate");
    auto doc = golden_json("stag_hunt");
    doc["run"]["epochs"] = 50;
    doc["run"]["replications"] = 2;
    const auto cfg = write_json(dir, doc);
    const auto a = dir / "a", b = dir / "b";
    ASSERT_EQ(cli({"simulate", cfg.string(), "--out", a.string(), "--threads", "2"}).code, kExitOk);
    ASSERT_EQ(cli({"simulate", cfg.string(), "--out", b.string(), "--threads", "1"}).code, kExitOk);
    for (const std::string f : {"trajectory_seed1.ndjson", "trajectory_seed2.ndjson", "occupancy.csv", "simulation.json"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(Cli, ZeroEpochsWritesHeaderOnly) {
    const auto dir = scratch("zero");
    auto doc = golden_json("stag_hunt");
    doc["run"]["epochs"] = 0;
    doc["run"]["replications"] = 1;
    const auto r = cli({"simulate", write_json(dir, doc).string(), "--out", dir.string(), "--seed", "7"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto text = slurp(dir / "trajectory_seed7.ndjson");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}
