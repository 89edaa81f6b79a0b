#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "clutter/bench.hpp"
#include "clutter/fixtures.hpp"
#include "clutter/io.hpp"
#include "clutter/observation.hpp"
#include "clutter/scene.hpp"
#include "clutter/solver.hpp"

namespace clutter {

// Exit codes shared by every subcommand: 0 success, 1 usage/config error,
// 2 failed episode.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitEpisodeFailed = 2;

struct GenArgs {
  std::string preset = "desk";
  std::string fixture;  // non-empty: emit a scripted fixture instead
  int objects = 0;      // 0: sample from the preset distribution
  std::uint64_t seed = 1;
  std::string out;  // empty: stdout
};

inline int cmd_gen(const GenArgs& a, std::ostream& log = std::cerr) {
  SceneState scene;
  if (!a.fixture.empty()) {
    scene = fixtures::by_name(a.fixture, a.seed);
  } else {
    GeneratorPreset p = GeneratorPreset::by_name(a.preset);
    Rng rng(hash_combine(a.seed, fnv1a("count")));
    int n = a.objects > 0 ? a.objects : p.sample_object_count(rng);
    scene = generate_clutter(p, n, a.seed);
  }
  std::string text = scene_to_string(scene);
  if (a.out.empty())
    std::cout << text;
  else
    write_text_file(a.out, text);
  log << "scene: " << scene.objects.size() << " objects, target "
      << scene.target_id << ", digest " << digest_hex(scene_digest(scene))
      << "\n";
  return kExitOk;
}

struct SolveArgs {
  std::string scene_file;
  std::string variant = "full";
  bool full_observation = false;
  bool use_oracle_predictor = false;
  bool oracle_eval = false;
  std::uint64_t seed = 1;
  std::string log_file;  // episode log, one JSON record per line
  std::string dot_file;  // final-graph DOT export (graph of the first step)
};

inline int cmd_solve(const SolveArgs& a, std::ostream& log = std::cerr) {
  SceneState scene = load_scene_file(a.scene_file);
  EpisodeOptions opt;
  opt.variant = variant_from_name(a.variant);
  opt.full_observation = a.full_observation;
  opt.use_oracle_predictor = a.use_oracle_predictor;
  opt.oracle_eval = a.oracle_eval;
  opt.seed = a.seed;

  // DOT export wants the initially built graph, so rebuild it standalone
  if (!a.dot_file.empty()) {
    Observation obs =
        a.full_observation ? full_observe(scene) : observe(scene, opt.camera);
    OracleBackedPredictor oracle_pred(&scene, opt.cfg.th_move);
    GeometricPredictor geom_pred;
    const DynamicsPredictor& pred =
        a.use_oracle_predictor ? static_cast<const DynamicsPredictor&>(oracle_pred)
                               : static_cast<const DynamicsPredictor&>(geom_pred);
    SupportGraph g =
        build_support_graph(obs, scene.target_id, opt.cfg, pred, a.seed);
    write_text_file(a.dot_file, g.to_dot());
  }

  EpisodeReport rep = run_episode(scene, opt);
  if (!a.log_file.empty()) write_text_file(a.log_file, episode_log_lines(rep));
  log << (rep.success ? "success" : "failure: " + rep.failure_reason)
      << " | steps " << rep.total_steps << " | queries " << rep.total_queries
      << " | displacement " << rep.accumulated_displacement << "\n";
  return rep.success ? kExitOk : kExitEpisodeFailed;
}

struct BenchArgs {
  BenchConfig cfg;
  std::string out_dir = "bench_out";
};

inline int cmd_bench(const BenchArgs& a, std::ostream& log = std::cerr) {
  BenchResult r = run_suite(a.cfg);
  write_text_file(std::filesystem::path(a.out_dir) / "bench.csv", format_csv(r));
  write_text_file(std::filesystem::path(a.out_dir) / "bench.txt",
                  format_table(r));
  log << format_table(r);
  // one-line ordering summary of success rates per preset
  for (const auto& p : r.presets) {
    log << p << " success:";
    for (const auto& v : r.variants)
      log << ' ' << v << '='
          << r.table.at(p).at(v).at("retrieval_success_rate").mean;
    log << '\n';
  }
  return kExitOk;
}

struct ObserveArgs {
  std::string scene_file;
  bool full = false;
  std::string out;  // empty: stdout
};

inline int cmd_observe(const ObserveArgs& a) {
  SceneState scene = load_scene_file(a.scene_file);
  Observation obs = a.full ? full_observe(scene) : observe(scene, CameraConfig{});
  std::string text = observation_to_json(obs).dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text_file(a.out, text);
  return kExitOk;
}

inline int cmd_fixtures(const std::string& dir, std::ostream& log = std::cerr) {
  for (const auto& name : fixtures::names()) {
    SceneState s = fixtures::by_name(name, 1);
    write_text_file(std::filesystem::path(dir) / (name + ".json"),
                    scene_to_string(s));
    log << "wrote " << name << ".json\n";
  }
  return kExitOk;
}

}  // namespace clutter
