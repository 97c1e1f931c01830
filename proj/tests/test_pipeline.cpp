#include <cmath>
#include <filesystem>
#include <unistd.h>

#include "doctest.h"
#include "mfunc/error.hpp"
#include "mfunc/pipeline.hpp"

using namespace mfunc;

namespace {
std::filesystem::path scratch(const char* name) {
    auto d = std::filesystem::temp_directory_path() / ("mfunc-test-" + std::to_string(::getpid()) + "-" + name);
    std::filesystem::remove_all(d);
    return d;
}
}  // namespace

TEST_CASE("config JSON round trip and hash") {
    pipeline::RunConfig c;
    c.spec = "sympow:3";
    c.sigma = 1.4;
    c.z_rect = density::Rectangle{-1, 1, -2, 2};
    const auto back = pipeline::config_from_json(pipeline::config_to_json(c));
    CHECK(pipeline::config_to_json(back) == pipeline::config_to_json(c));
    CHECK(pipeline::config_hash(back) == pipeline::config_hash(c));

    auto moved = c;
    moved.out_dir = "elsewhere";
    moved.cache_dir = "/tmp/other";
    CHECK(pipeline::config_hash(moved) == pipeline::config_hash(c));
    moved.sigma = 1.5;
    CHECK(pipeline::config_hash(moved) != pipeline::config_hash(c));

    CHECK_THROWS_AS(pipeline::config_from_json(io::Json{{"sigmaa", 1.0}}), Error);
    CHECK_THROWS_AS(pipeline::config_from_json(io::Json{{"sigma", "high"}}), Error);
    CHECK_THROWS_AS(pipeline::config_from_json(io::Json{{"z_rect", {1, 2}}}), Error);
    CHECK(pipeline::config_from_json(io::Json{{"samples", 5000}}).samples == 5000);
}

TEST_CASE("validation and spec selectors") {
    CHECK(pipeline::parse_spec("sympow:4").gamma == 4);
    CHECK(pipeline::parse_spec("modular").family == euler::Family::modular);
    for (const char* bad : {"sympow:", "sympow:x", "sympow:0", "dirichlet", ""})
        CHECK_THROWS_AS(pipeline::parse_spec(bad), Error);

    pipeline::RunConfig c;
    pipeline::validate(c);
    c.w_nodes = 512;
    CHECK_THROWS_AS(pipeline::validate(c), Error);
    c = {};
    c.samples = 10;
    CHECK_THROWS_AS(pipeline::validate(c), Error);
    c = {};
    c.sigma = -1.0;
    CHECK_THROWS_AS(pipeline::validate(c), Error);
}

TEST_CASE("sigma at or below sigma0 needs the heuristic opt-in") {
    pipeline::RunConfig c;
    c.sigma = 0.5;
    const auto spec = pipeline::load_spec(c);
    try {
        pipeline::check_sigma(spec, c);
        FAIL("expected refusal");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
    c.allow_heuristic = true;
    pipeline::check_sigma(spec, c);
}

TEST_CASE("outputs carry provenance") {
    pipeline::RunConfig c;
    c.seed = 9;
    const auto dir = scratch("emit");
    pipeline::emit(dir, "a.csv", "x\n1\n", io::Json{{"kind", "test"}}, &c);
    pipeline::emit_json(dir, "b.json", io::Json{{"value", 2}}, &c);
    CHECK(io::read_text(dir / "a.csv") == "x\n1\n");
    const auto side = io::Json::parse(io::read_text(dir / "a.csv.json"));
    CHECK(side["kind"] == "test");
    CHECK(side["seed"] == 9);
    CHECK(side["config_hash"] == pipeline::config_hash(c));
    CHECK_FALSE(side["config"].contains("out_dir"));
    const auto body = io::Json::parse(io::read_text(dir / "b.json"));
    CHECK(body["value"] == 2);
    CHECK(body["config_hash"] == pipeline::config_hash(c));
    std::filesystem::remove_all(dir);
}

TEST_CASE("more primes in the sampler do not move the discrepancy beyond noise") {
    pipeline::RunConfig c;
    c.samples = 20000;
    c.sample_cutoff = 2500;
    const auto coarse = pipeline::run_compare(c, false);
    c.sample_cutoff = 10000;
    const auto fine = pipeline::run_compare(c, false);
    const double noise = std::max(coarse.report.max_std_error, fine.report.max_std_error);
    CHECK(std::abs(coarse.report.sup_rect - fine.report.sup_rect) < noise);
    // L1 noise at 2e4 samples is above the default L1 tolerance, so only the rectangles are checked.
    CHECK(coarse.report.sup_rect < 0.02);
    CHECK(fine.report.sup_rect < 0.02);
}
