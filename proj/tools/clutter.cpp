// Command-line front end: scene generation, single-episode solving,
// observation dumps, fixture export, and the benchmark suite.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clutter/cli.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic clutter-retrieval planner and simulator"};
  app.require_subcommand(1);

  clutter::GenArgs gen;
  auto* cgen = app.add_subcommand("gen", "generate a clutter scene");
  cgen->add_option("--preset", gen.preset, "kitchen|desk|food|sundries");
  cgen->add_option("--fixture", gen.fixture, "emit a scripted fixture instead");
  cgen->add_option("--objects", gen.objects, "object count (0: sampled)");
  cgen->add_option("--seed", gen.seed, "generation seed");
  cgen->add_option("--out", gen.out, "output scene file (default: stdout)");

  clutter::SolveArgs solve;
  auto* csolve = app.add_subcommand("solve", "run one retrieval episode");
  csolve->add_option("--scene", solve.scene_file, "scene file")->required();
  csolve->add_option("--variant", solve.variant,
                     "full|no_dp|no_ga|no_rb|greedy_top");
  csolve->add_flag("--full-obs", solve.full_observation,
                   "perfect observation instead of the camera");
  csolve->add_flag("--oracle-predictor", solve.use_oracle_predictor,
                   "answer dynamics queries from the simulator");
  csolve->add_flag("--oracle-eval", solve.oracle_eval,
                   "score predictions against the simulator");
  csolve->add_option("--seed", solve.seed, "episode seed");
  csolve->add_option("--log", solve.log_file, "episode log (JSON lines)");
  csolve->add_option("--dot", solve.dot_file, "initial support graph as DOT");

  clutter::BenchArgs bench;
  std::string bench_presets = "kitchen,desk,food,sundries";
  std::string bench_variants = "full,no_dp,no_ga,no_rb,greedy_top";
  auto* cbench = app.add_subcommand("bench", "run the benchmark suite");
  cbench->add_option("--presets", bench_presets, "comma-separated presets");
  cbench->add_option("--variants", bench_variants, "comma-separated variants");
  cbench->add_option("--scenes", bench.cfg.scenes_per_preset,
                     "scenes per preset");
  cbench->add_option("--seed", bench.cfg.seed, "suite seed");
  cbench->add_option("--workers", bench.cfg.workers,
                     "worker threads (output is worker-count independent)");
  cbench->add_flag("--full-obs", bench.cfg.full_observation,
                   "perfect observation instead of the camera");
  cbench->add_flag("--oracle-predictor", bench.cfg.use_oracle_predictor,
                   "answer dynamics queries from the simulator");
  cbench->add_flag("--oracle-eval", bench.cfg.oracle_eval,
                   "score predictions against the simulator");
  cbench->add_option("--objects-min", bench.cfg.objects_min,
                     "override preset minimum object count");
  cbench->add_option("--objects-max", bench.cfg.objects_max,
                     "override preset maximum object count");
  cbench->add_option("--out-dir", bench.out_dir, "report directory");

  clutter::ObserveArgs obs;
  auto* cobs = app.add_subcommand("observe", "dump a camera observation");
  cobs->add_option("--scene", obs.scene_file, "scene file")->required();
  cobs->add_flag("--full", obs.full, "perfect observation");
  cobs->add_option("--out", obs.out, "output file (default: stdout)");

  std::string fixtures_dir = "fixtures";
  auto* cfix = app.add_subcommand("fixtures", "export scripted fixture scenes");
  cfix->add_option("--dir", fixtures_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? clutter::kExitOk : clutter::kExitUsage;
  }

  try {
    if (cgen->parsed()) return clutter::cmd_gen(gen);
    if (csolve->parsed()) return clutter::cmd_solve(solve);
    if (cbench->parsed()) {
      bench.cfg.presets = split_csv(bench_presets);
      bench.cfg.variants.clear();
      for (const auto& v : split_csv(bench_variants))
        bench.cfg.variants.push_back(clutter::variant_from_name(v));
      return clutter::cmd_bench(bench);
    }
    if (cobs->parsed()) return clutter::cmd_observe(obs);
    if (cfix->parsed()) return clutter::cmd_fixtures(fixtures_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return clutter::kExitUsage;
  }
  return clutter::kExitUsage;
}
