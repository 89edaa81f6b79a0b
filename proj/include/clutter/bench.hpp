#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "clutter/rng.hpp"
#include "clutter/scene.hpp"
#include "clutter/solver.hpp"

namespace clutter {

struct BenchConfig {
  std::vector<std::string> presets{"kitchen", "desk", "food", "sundries"};
  int scenes_per_preset = 25;
  std::uint64_t seed = 7;
  std::vector<PlannerVariant> variants{
      PlannerVariant::full, PlannerVariant::no_dp, PlannerVariant::no_ga,
      PlannerVariant::no_rb, PlannerVariant::greedy_top};
  int workers = 1;
  bool full_observation = false;
  bool use_oracle_predictor = false;
  bool oracle_eval = false;  // score relations/directions against the simulator
  int objects_min = -1;      // <0: use the preset's count distribution
  int objects_max = -1;
  SolverConfig solver;
  CameraConfig camera;
};

struct MetricValue {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
};

inline const std::vector<std::string>& metric_order() {
  static const std::vector<std::string> m{
      "retrieval_success_rate",          "relation_prediction_success_rate",
      "retrieval_direction_success_rate", "accumulated_displacement_mean",
      "retrieval_steps_mean",            "query_count_mean"};
  return m;
}

struct BenchResult {
  std::vector<std::string> presets;
  std::vector<std::string> variants;
  // preset -> variant -> metric -> value
  std::map<std::string, std::map<std::string, std::map<std::string, MetricValue>>>
      table;
};

namespace detail {

struct EpisodeStats {
  bool success = false;
  double displacement = 0.0;
  int steps = 0;
  long queries = 0;
  double relation_rate = 0.0;
  bool has_relation = false;
  double direction_rate = 0.0;
  bool has_direction = false;
};

inline MetricValue summarize(const std::vector<double>& xs) {
  MetricValue v;
  v.n = static_cast<long>(xs.size());
  if (xs.empty()) return v;
  double s = 0.0;
  for (double x : xs) s += x;
  v.mean = s / static_cast<double>(v.n);
  if (v.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - v.mean) * (x - v.mean);
    v.stderr_ = std::sqrt(ss / static_cast<double>(v.n - 1) /
                          static_cast<double>(v.n));
  }
  return v;
}

inline SceneState bench_scene(const BenchConfig& cfg, const std::string& preset,
                              int index) {
  GeneratorPreset p = GeneratorPreset::by_name(preset);
  if (cfg.objects_min > 0) p.count_min = cfg.objects_min;
  if (cfg.objects_max > 0) p.count_max = std::max(cfg.objects_max, p.count_min);
  std::uint64_t scene_seed = hash_combine(
      cfg.seed, hash_combine(fnv1a(preset), static_cast<std::uint64_t>(index)));
  // rare unstable placements are retried with a salted seed, deterministically
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::uint64_t sd = hash_combine(scene_seed, attempt);
    Rng rng(hash_combine(sd, fnv1a("count")));
    int n = p.sample_object_count(rng);
    try {
      return generate_clutter(p, n, sd);
    } catch (const std::runtime_error&) {
      if (attempt >= 64) throw;
    }
  }
}

}  // namespace detail

// Run every variant on identical generated scenes. The per-scene work is
// distributed over `workers` threads writing into pre-sized slots, so output
// does not depend on the worker count or scheduling order.
inline BenchResult run_suite(const BenchConfig& cfg) {
  if (cfg.variants.empty()) throw std::runtime_error("no variants");
  if (cfg.presets.empty()) throw std::runtime_error("no presets");
  if (cfg.scenes_per_preset < 1)
    throw std::invalid_argument("run_suite: scenes_per_preset < 1");

  const int np = static_cast<int>(cfg.presets.size());
  const int ns = cfg.scenes_per_preset;
  const int nv = static_cast<int>(cfg.variants.size());
  std::vector<detail::EpisodeStats> stats(
      static_cast<std::size_t>(np) * ns * nv);

  auto run_task = [&](int task) {
    int pi = task / ns;
    int si = task % ns;
    SceneState scene = detail::bench_scene(cfg, cfg.presets[pi], si);
    for (int vi = 0; vi < nv; ++vi) {
      EpisodeOptions opt;
      opt.cfg = cfg.solver;
      opt.variant = cfg.variants[vi];
      opt.full_observation = cfg.full_observation;
      opt.camera = cfg.camera;
      opt.seed = hash_combine(scene.rng_seed, fnv1a("episode"));
      opt.use_oracle_predictor = cfg.use_oracle_predictor;
      opt.oracle_eval = cfg.oracle_eval;
      EpisodeReport rep = run_episode(scene, opt);
      detail::EpisodeStats& st =
          stats[(static_cast<std::size_t>(pi) * ns + si) * nv + vi];
      st.success = rep.success;
      st.displacement = rep.accumulated_displacement;
      st.steps = rep.total_steps;
      st.queries = rep.total_queries;
      if (rep.relation_total > 0) {
        st.has_relation = true;
        st.relation_rate = static_cast<double>(rep.relation_correct) /
                           static_cast<double>(rep.relation_total);
      }
      if (rep.direction_eval_steps > 0) {
        st.has_direction = true;
        st.direction_rate = static_cast<double>(rep.direction_optimal_steps) /
                            static_cast<double>(rep.direction_eval_steps);
      }
    }
  };

  const int total = np * ns;
  int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    for (int t = 0; t < total; ++t) run_task(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < total; t = next.fetch_add(1))
          run_task(t);
      });
    for (auto& th : pool) th.join();
  }

  BenchResult out;
  out.presets = cfg.presets;
  for (auto v : cfg.variants) out.variants.push_back(variant_name(v));
  for (int pi = 0; pi < np; ++pi) {
    // steps_mean only counts scenes every variant solved, so step counts
    // compare like for like
    std::vector<char> all_ok(ns, 1);
    for (int si = 0; si < ns; ++si)
      for (int vi = 0; vi < nv; ++vi)
        if (!stats[(static_cast<std::size_t>(pi) * ns + si) * nv + vi].success)
          all_ok[si] = 0;
    for (int vi = 0; vi < nv; ++vi) {
      std::vector<double> succ, rel, dir, disp, steps, queries;
      for (int si = 0; si < ns; ++si) {
        const detail::EpisodeStats& st =
            stats[(static_cast<std::size_t>(pi) * ns + si) * nv + vi];
        succ.push_back(st.success ? 1.0 : 0.0);
        disp.push_back(st.displacement);
        queries.push_back(static_cast<double>(st.queries));
        if (st.has_relation) rel.push_back(st.relation_rate);
        if (st.has_direction) dir.push_back(st.direction_rate);
        if (all_ok[si]) steps.push_back(static_cast<double>(st.steps));
      }
      auto& row = out.table[cfg.presets[pi]][out.variants[vi]];
      row["retrieval_success_rate"] = detail::summarize(succ);
      row["relation_prediction_success_rate"] = detail::summarize(rel);
      row["retrieval_direction_success_rate"] = detail::summarize(dir);
      row["accumulated_displacement_mean"] = detail::summarize(disp);
      row["retrieval_steps_mean"] = detail::summarize(steps);
      row["query_count_mean"] = detail::summarize(queries);
    }
  }
  return out;
}

inline std::string format_csv(const BenchResult& r) {
  if (r.variants.empty()) throw std::runtime_error("no variants");
  std::ostringstream os;
  os << "preset,variant,metric,mean,stderr,n\n";
  char buf[64];
  for (const auto& p : r.presets)
    for (const auto& v : r.variants)
      for (const auto& m : metric_order()) {
        const MetricValue& mv = r.table.at(p).at(v).at(m);
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%ld", mv.mean, mv.stderr_,
                      mv.n);
        os << p << ',' << v << ',' << m << ',' << buf << '\n';
      }
  return os.str();
}

inline std::string format_table(const BenchResult& r) {
  if (r.variants.empty()) throw std::runtime_error("no variants");
  std::ostringstream os;
  char buf[64];
  for (const auto& p : r.presets) {
    os << "== " << p << " ==\n";
    os << "  " << std::string(34, ' ');
    for (const auto& v : r.variants) {
      std::snprintf(buf, sizeof(buf), "%12s", v.c_str());
      os << buf;
    }
    os << '\n';
    for (const auto& m : metric_order()) {
      std::snprintf(buf, sizeof(buf), "  %-34s", m.c_str());
      os << buf;
      for (const auto& v : r.variants) {
        const MetricValue& mv = r.table.at(p).at(v).at(m);
        std::snprintf(buf, sizeof(buf), "%12.4f", mv.mean);
        os << buf;
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace clutter
