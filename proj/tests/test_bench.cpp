#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "clutter/bench.hpp"

using namespace clutter;

TEST_CASE("summarize computes mean and sample standard error") {
  auto v = detail::summarize({1.0, 2.0, 3.0, 4.0});
  REQUIRE(v.n == 4);
  REQUIRE(v.mean == Catch::Approx(2.5));
  // sample stddev = sqrt(5/3), stderr = that / sqrt(4)
  REQUIRE(v.stderr_ == Catch::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  auto single = detail::summarize({7.0});
  REQUIRE(single.mean == 7.0);
  REQUIRE(single.stderr_ == 0.0);
  auto empty = detail::summarize({});
  REQUIRE(empty.n == 0);
  REQUIRE(empty.mean == 0.0);
}

TEST_CASE("run_suite validates its configuration") {
  BenchConfig cfg;
  cfg.variants.clear();
  REQUIRE_THROWS_WITH(run_suite(cfg), "no variants");
  cfg = BenchConfig{};
  cfg.presets.clear();
  REQUIRE_THROWS_WITH(run_suite(cfg), "no presets");
  cfg = BenchConfig{};
  cfg.scenes_per_preset = 0;
  REQUIRE_THROWS_AS(run_suite(cfg), std::invalid_argument);
}

namespace {

BenchConfig small_cfg() {
  BenchConfig cfg;
  cfg.presets = {"desk"};
  cfg.scenes_per_preset = 4;
  cfg.seed = 3;
  cfg.variants = {PlannerVariant::full, PlannerVariant::greedy_top};
  cfg.objects_min = 5;
  cfg.objects_max = 7;
  cfg.full_observation = true;
  cfg.use_oracle_predictor = true;
  return cfg;
}

}  // namespace

TEST_CASE("csv output has the pinned schema and row order") {
  BenchResult r = run_suite(small_cfg());
  std::string csv = format_csv(r);
  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  REQUIRE(line == "preset,variant,metric,mean,stderr,n");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    // preset,variant,metric + three numeric fields
    REQUIRE(std::count(line.begin(), line.end(), ',') == 5);
    REQUIRE(line.rfind("desk,", 0) == 0);
  }
  REQUIRE(rows == 2 * static_cast<int>(metric_order().size()));
  // %.6f formatting: means carry six decimals
  REQUIRE(csv.find("retrieval_success_rate,") != std::string::npos);
  auto pos = csv.find("retrieval_success_rate,");
  std::string tail = csv.substr(pos + std::string("retrieval_success_rate,").size());
  REQUIRE(tail.find('.') == 1);  // d.dddddd
}

TEST_CASE("workers=1 and workers=8 produce byte-identical CSV") {
  BenchConfig cfg = small_cfg();
  cfg.workers = 1;
  std::string a = format_csv(run_suite(cfg));
  cfg.workers = 8;
  std::string b = format_csv(run_suite(cfg));
  REQUIRE(a == b);
}

TEST_CASE("steps_mean is restricted to scenes every variant solved") {
  BenchResult r = run_suite(small_cfg());
  const auto& full = r.table.at("desk").at("full");
  const auto& greedy = r.table.at("desk").at("greedy_top");
  // the restriction forces identical sample counts across variants
  REQUIRE(full.at("retrieval_steps_mean").n ==
          greedy.at("retrieval_steps_mean").n);
  // success is tallied over all scenes
  REQUIRE(full.at("retrieval_success_rate").n == 4);
}

TEST_CASE("success flags aggregate into the success rate") {
  BenchResult r = run_suite(small_cfg());
  for (const auto& v : r.variants) {
    double rate = r.table.at("desk").at(v).at("retrieval_success_rate").mean;
    REQUIRE(rate >= 0.0);
    REQUIRE(rate <= 1.0);
    // with four scenes the rate is a multiple of 0.25
    REQUIRE(std::abs(rate * 4.0 - std::round(rate * 4.0)) < 1e-12);
  }
}

TEST_CASE("bench scenes are reproducible and respect object count overrides") {
  BenchConfig cfg = small_cfg();
  SceneState a = detail::bench_scene(cfg, "desk", 2);
  SceneState b = detail::bench_scene(cfg, "desk", 2);
  REQUIRE(a.rng_seed == b.rng_seed);
  REQUIRE(a.objects.size() == b.objects.size());
  REQUIRE(static_cast<int>(a.objects.size()) >= 5);
  REQUIRE(static_cast<int>(a.objects.size()) <= 7);
  SceneState c = detail::bench_scene(cfg, "desk", 3);
  REQUIRE(a.rng_seed != c.rng_seed);
}

TEST_CASE("format_table renders one block per preset") {
  BenchResult r = run_suite(small_cfg());
  std::string t = format_table(r);
  REQUIRE(t.find("== desk ==") != std::string::npos);
  for (const auto& m : metric_order()) REQUIRE(t.find(m) != std::string::npos);
}
