#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "i3net/config.hpp"

using namespace i3net;
using namespace i3net::cli;
namespace fs = std::filesystem;

namespace {

std::string write_tmp(const std::string& name, const std::string& text) {
    const auto dir = fs::temp_directory_path() / "i3net_config_test";
    fs::create_directories(dir);
    const auto path = (dir / name).string();
    std::ofstream f(path, std::ios::binary);
    f << text;
    return path;
}

} // namespace

TEST_CASE("empty file plus no flags gives the documented defaults") {
    const auto path = write_tmp("empty.json", "");
    RunConfig rc = parse_config(path, {});
    CHECK(rc.model.channels == 32);
    CHECK(rc.model.n_blocks == 4);
    CHECK(rc.model.cvb_positions == std::vector<int>{2});
    CHECK(rc.model.window == 16);
    CHECK(rc.train.epochs == 50);
    CHECK(rc.train.batch_size == 4);
    CHECK(rc.train.lr0 == doctest::Approx(3e-4));
    CHECK(rc.data.scale == 2);
    CHECK(rc.data.crop == 64);
    CHECK(rc.seed == 0);
    CHECK_FALSE(rc.deterministic);
    // No path at all behaves the same.
    RunConfig rc2 = parse_config("", {});
    CHECK(run_config_to_json(rc) == run_config_to_json(rc2));
}

TEST_CASE("overrides beat file values") {
    const auto path = write_tmp("lr.json", R"({"seed": 7, "train": {"lr0": 1e-3}})");
    Overrides ov;
    ov.seed = 99;
    RunConfig rc = parse_config(path, ov);
    CHECK(rc.seed == 99);
    CHECK(rc.train.lr0 == doctest::Approx(1e-3)); // file value survives where no flag overrides
    CHECK(rc.train.seed == 99);                   // propagated to the train config
}

TEST_CASE("unknown keys are rejected with an aggregated message") {
    const auto path = write_tmp("unknown.json",
                                R"({"data": {"scale": 2, "what": 1}, "modle": {}, "train": {"epochs": 0}})");
    try {
        parse_config(path, {});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("data.what") != std::string::npos);
        CHECK(msg.find("modle") != std::string::npos);
        CHECK(msg.find("epochs") != std::string::npos);
        CHECK(msg.find("3 problem") != std::string::npos);
    }
}

TEST_CASE("range violations name the constraint") {
    const auto path = write_tmp("c30.json", R"({"model": {"channels": 30}})");
    CHECK_THROWS_WITH_AS(parse_config(path, {}), doctest::Contains("multiple of 4"),
                         ValidationError);
    const auto path2 = write_tmp("crop.json", R"({"data": {"crop": 20}})");
    CHECK_THROWS_WITH_AS(parse_config(path2, {}), doctest::Contains("divisible by 16"),
                         ValidationError);
}

TEST_CASE("type mismatches are reported, not crashed on") {
    const auto path = write_tmp("type.json", R"({"train": {"epochs": "many"}})");
    CHECK_THROWS_WITH_AS(parse_config(path, {}), doctest::Contains("wrong type"), ValidationError);
}

TEST_CASE("env var forces deterministic mode") {
    const auto path = write_tmp("det.json", R"({"deterministic": false})");
    setenv("I3NET_DETERMINISTIC", "1", 1);
    RunConfig rc = parse_config(path, {});
    unsetenv("I3NET_DETERMINISTIC");
    CHECK(rc.deterministic);
    CHECK(rc.train.deterministic);
}

TEST_CASE("fingerprint is stable for equal configs and differs otherwise") {
    RunConfig a = parse_config("", {});
    RunConfig b = parse_config("", {});
    CHECK(config_fingerprint(a) == config_fingerprint(b));
    b.seed = 1;
    CHECK(config_fingerprint(a) != config_fingerprint(b));
    CHECK(config_fingerprint(a).size() == 16);
}

TEST_CASE("scale and s_in flow into the model config") {
    const auto path = write_tmp("flow.json", R"({"data": {"scale": 6, "s_in": 4, "crop": 32},
                                                 "model": {"window": 16}})");
    RunConfig rc = parse_config(path, {});
    CHECK(rc.model.scale == 6);
    CHECK(rc.model.s_out() == 19);
    CHECK(rc.train.crop == 32);
}

TEST_CASE("missing file is an IO error") {
    CHECK_THROWS_AS(parse_config("/nonexistent/i3net.json", {}), IoError);
}
