#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "clutter/affordance.hpp"
#include "clutter/direction.hpp"
#include "clutter/dynamics.hpp"
#include "clutter/geometry.hpp"
#include "clutter/observation.hpp"
#include "clutter/scene.hpp"
#include "clutter/support_graph.hpp"

namespace clutter {

struct SolverConfig {
  double th_move = 0.005;
  double eps_adj = 0.03;
  double disp_tol = 0.005;
  int max_nodes = 256;
  int max_steps = 64;
  int r = 256;
  bool use_direction_predictor = true;  // false: retrieval is always +z
  DirectionConfig direction;
  AffordanceConfig affordance;
};

struct QueryRecord {
  int mover = -1;
  int neighbor = -1;
  UnitDir dir = UnitDir::plus_z();
  bool predicted_moves = false;
  bool oracle_moves = false;
  bool oracle_valid = false;
};

// One broadcast step: pick the node's retrieval direction (cached on the
// graph), then query the local dynamics of every adjacent non-parent
// neighbor; neighbors predicted to move beyond th_move become children.
// Does not recurse. Returns newly added nodes.
inline std::vector<int> broadcast_from(const Observation& obs, int start_id,
                                       SupportGraph& graph,
                                       const SolverConfig& cfg,
                                       const DynamicsPredictor& predictor,
                                       std::uint64_t seed,
                                       std::vector<QueryRecord>* log = nullptr) {
  if (!obs.has(start_id))
    throw std::out_of_range("broadcast_from: start not in observation");
  DirectionChoice choice =
      cfg.use_direction_predictor
          ? best_direction(obs, start_id, cfg.direction, predictor, cfg.eps_adj,
                           cfg.r, seed)
          : DirectionChoice{UnitDir::plus_z(), 1.0};
  graph.nodes.insert(start_id);
  graph.direction_cache[start_id] = choice;

  std::set<int> parent_set;
  for (int p : graph.parents(start_id)) parent_set.insert(p);

  std::vector<int> new_nodes;
  for (int j : adjacency(obs, start_id, cfg.eps_adj)) {
    if (parent_set.count(j)) continue;
    auto q = make_query(obs, start_id, j, choice.dir, cfg.r, cfg.eps_adj);
    auto pred = predictor.predict(q);
    ++graph.query_count;
    bool moves = pred.magnitude > cfg.th_move;
    if (log) log->push_back({start_id, j, choice.dir, moves, false, false});
    if (moves) {
      bool fresh = !graph.has_node(j);
      graph.add_edge(start_id, j);  // throws on mutual support
      if (fresh) new_nodes.push_back(j);
    }
  }
  graph.expanded.insert(start_id);
  return new_nodes;
}

// Worklist fixpoint of broadcasts starting at the target.
inline SupportGraph build_support_graph(const Observation& obs, int target_id,
                                        const SolverConfig& cfg,
                                        const DynamicsPredictor& predictor,
                                        std::uint64_t seed,
                                        long* degree_budget = nullptr,
                                        std::vector<QueryRecord>* log = nullptr) {
  if (!obs.has(target_id))
    throw std::out_of_range("build_support_graph: target not visible");
  SupportGraph graph;
  graph.nodes.insert(target_id);
  bool progress = true;
  while (progress) {
    progress = false;
    for (int n : std::vector<int>(graph.nodes.begin(), graph.nodes.end())) {
      if (graph.expanded.count(n)) continue;
      if (!obs.has(n)) continue;
      if (static_cast<int>(graph.nodes.size()) > cfg.max_nodes)
        throw std::runtime_error("support graph node limit exceeded");
      if (degree_budget)
        *degree_budget +=
            static_cast<long>(adjacency(obs, n, cfg.eps_adj).size());
      broadcast_from(obs, n, graph, cfg, predictor, seed, log);
      progress = true;
    }
  }
  return graph;
}

// Zero-outdegree node, highest observed centroid first, ties by smallest id.
inline int next_retrievable(const SupportGraph& graph, const Observation& obs) {
  if (graph.nodes.empty())
    throw std::logic_error("next_retrievable: empty graph");
  int best = -1;
  double best_z = 0.0;
  for (int n : graph.nodes) {
    if (graph.out_degree(n) != 0) continue;
    double z = obs.has(n) ? obs.get(n).visible_points.centroid().z : -1e17;
    if (best < 0 || z > best_z + 1e-12) {
      best = n;
      best_z = z;
    }
  }
  if (best < 0) throw std::runtime_error("mutual support detected (no leaf)");
  return best;
}

// Graph Adjustment: re-broadcast from the candidate on the current
// observation; newly discovered nodes are expanded recursively (never
// restarting from the target). Returns the number of nodes added.
inline int graph_adjust(const Observation& obs, SupportGraph& graph,
                        int candidate_id, const SolverConfig& cfg,
                        const DynamicsPredictor& predictor, std::uint64_t seed,
                        long* degree_budget = nullptr,
                        std::vector<QueryRecord>* log = nullptr) {
  if (degree_budget)
    *degree_budget +=
        static_cast<long>(adjacency(obs, candidate_id, cfg.eps_adj).size());
  std::vector<int> frontier =
      broadcast_from(obs, candidate_id, graph, cfg, predictor, seed, log);
  int added = 0;
  while (!frontier.empty()) {
    added += static_cast<int>(frontier.size());
    std::vector<int> next;
    for (int n : frontier) {
      if (graph.expanded.count(n) || !obs.has(n)) continue;
      if (degree_budget)
        *degree_budget +=
            static_cast<long>(adjacency(obs, n, cfg.eps_adj).size());
      for (int fresh : broadcast_from(obs, n, graph, cfg, predictor, seed, log))
        next.push_back(fresh);
    }
    frontier = std::move(next);
  }
  return added;
}

// ---------------------------------------------------------------------------
// Episode loop

struct StepRecord {
  int object_id = -1;
  Action action;
  std::vector<MovementRecord> movements;
  std::uint64_t graph_digest = 0;
  int queries = 0;
  bool adjust_added_nodes = false;
  double max_other_displacement = 0.0;
  std::vector<QueryRecord> query_log;
  bool direction_evaluated = false;
  bool direction_optimal = false;
};

struct EpisodeReport {
  std::vector<StepRecord> steps;
  bool success = false;
  std::string failure_reason;
  double accumulated_displacement = 0.0;
  long total_queries = 0;
  long degree_budget = 0;
  int adjust_events = 0;
  int total_steps = 0;
  long relation_correct = 0;
  long relation_total = 0;
  long direction_optimal_steps = 0;
  long direction_eval_steps = 0;
};

enum class PlannerVariant { full, no_dp, no_ga, no_rb, greedy_top };

inline PlannerVariant variant_from_name(const std::string& name) {
  if (name == "full") return PlannerVariant::full;
  if (name == "no_dp") return PlannerVariant::no_dp;
  if (name == "no_ga") return PlannerVariant::no_ga;
  if (name == "no_rb") return PlannerVariant::no_rb;
  if (name == "greedy_top") return PlannerVariant::greedy_top;
  throw std::invalid_argument("unknown planner variant: " + name);
}

inline std::string variant_name(PlannerVariant v) {
  switch (v) {
    case PlannerVariant::full: return "full";
    case PlannerVariant::no_dp: return "no_dp";
    case PlannerVariant::no_ga: return "no_ga";
    case PlannerVariant::no_rb: return "no_rb";
    case PlannerVariant::greedy_top: return "greedy_top";
  }
  return "?";
}

struct EpisodeOptions {
  SolverConfig cfg;
  PlannerVariant variant = PlannerVariant::full;
  bool full_observation = false;
  CameraConfig camera;
  std::uint64_t seed = 0;
  bool use_oracle_predictor = false;  // test/benchmark predictor
  bool oracle_eval = false;  // score queries/directions against the simulator
};

namespace detail {

// Per-step oracle scoring with a cache of the direction-independent
// pure-removal settle.
struct OracleStepEval {
  const SceneState* scene;
  std::map<int, std::map<int, double>> removal_cache;

  const std::map<int, double>& removal_map(int mover_id) {
    auto it = removal_cache.find(mover_id);
    if (it != removal_cache.end()) return it->second;
    SceneState clone = *scene;
    clone.removed.insert(mover_id);
    std::map<int, double> m;
    for (int id : scene->active_ids())
      if (id != mover_id) m[id] = 0.0;
    for (const auto& r : settle_in_place(clone)) m[r.object_id] = r.displacement;
    return removal_cache.emplace(mover_id, std::move(m)).first->second;
  }

  std::map<int, double> movement(int mover_id, const UnitDir& d) {
    if (!sweep_provably_clear(*scene, mover_id, d) &&
        !oracle_sweep_pushes(*scene, mover_id, d).empty())
      return oracle_movement(*scene, mover_id, d);
    return removal_map(mover_id);
  }

  double total(int mover_id, const UnitDir& d) {
    double t = 0.0;
    for (const auto& [id, m] : movement(mover_id, d)) t += m;
    return t;
  }
};

}  // namespace detail

// Full episode: observe, build/adjust the support graph, retrieve
// zero-outdegree nodes until the target is out. Deterministic for fixed
// seeds. Planner errors (unreachable grasp, mutual support) are recorded as
// failed episodes, not raised.
inline EpisodeReport run_episode(SceneState scene, const EpisodeOptions& opt) {
  EpisodeReport report;
  SolverConfig cfg = opt.cfg;
  if (opt.variant == PlannerVariant::no_dp) cfg.use_direction_predictor = false;
  const int target = scene.target_id;

  OracleBackedPredictor oracle_pred(&scene, cfg.th_move);
  GeometricPredictor geom_pred(DynamicsParams{
      cfg.r, cfg.th_move, 0.5, 0.3, 1.0, scene.params.delta_sweep});
  const DynamicsPredictor* pred =
      opt.use_oracle_predictor
          ? static_cast<const DynamicsPredictor*>(&oracle_pred)
          : &geom_pred;

  SupportGraph graph;
  bool graph_built = false;
  bool disturbed = false;
  const bool use_ga = opt.variant == PlannerVariant::full ||
                      opt.variant == PlannerVariant::no_dp;

  try {
    for (int step = 0; step < cfg.max_steps; ++step) {
      Observation obs =
          opt.full_observation ? full_observe(scene) : observe(scene, opt.camera);
      obs.step = step;
      StepRecord rec;
      long queries_before = graph.query_count;

      int pick = -1;
      DirectionChoice dir_choice{UnitDir::plus_z(), 1.0};

      if (opt.variant == PlannerVariant::greedy_top) {
        double best_z = -1e18;
        for (const auto& o : obs.objects) {
          double z = o.visible_points.centroid().z;
          if (z > best_z) {
            best_z = z;
            pick = o.id;
          }
        }
        if (pick < 0) {
          report.failure_reason = "nothing visible";
          break;
        }
      } else if (!graph_built && !obs.has(target)) {
        // target fully occluded: uncover it by lifting the highest visible
        // object straight up, then build the graph once it can be seen
        double best_z = -1e18;
        for (const auto& o : obs.objects) {
          double z = o.visible_points.centroid().z;
          if (z > best_z) {
            best_z = z;
            pick = o.id;
          }
        }
        if (pick < 0) {
          report.failure_reason = "nothing visible";
          break;
        }
      } else {
        if (!graph_built) {
          if (opt.variant == PlannerVariant::no_rb) {
            // all-pairs direct prediction on the initial observation, no
            // recursion, no later updates
            graph.nodes.insert(target);
            for (const auto& mover : obs.objects) {
              DirectionChoice mover_dir =
                  cfg.use_direction_predictor
                      ? best_direction(obs, mover.id, cfg.direction, *pred,
                                       cfg.eps_adj, cfg.r, opt.seed)
                      : DirectionChoice{UnitDir::plus_z(), 1.0};
              graph.direction_cache[mover.id] = mover_dir;
              for (const auto& nb : obs.objects) {
                if (nb.id == mover.id) continue;
                DynamicsQuery q;
                q.mover_id = mover.id;
                q.neighbor_id = nb.id;
                q.direction = mover_dir.dir;
                q.mover_cloud = farthest_point_sample(
                    mover.visible_points, static_cast<std::size_t>(cfg.r));
                q.neighbor_cloud = farthest_point_sample(
                    nb.visible_points, static_cast<std::size_t>(cfg.r));
                auto pr = pred->predict(q);
                ++graph.query_count;
                bool moves = pr.magnitude > cfg.th_move;
                rec.query_log.push_back(
                    {mover.id, nb.id, q.direction, moves, false, false});
                // all-pairs prediction can be symmetric; keep the first edge
                // of a would-be cycle and drop the back edge
                if (moves && !graph.reachable_from(nb.id).count(mover.id))
                  graph.add_edge(mover.id, nb.id);
              }
              graph.expanded.insert(mover.id);
              report.degree_budget +=
                  static_cast<long>(obs.objects.size()) - 1;
            }
            std::set<int> keep = graph.reachable_from(target);
            keep.insert(target);
            for (int n :
                 std::vector<int>(graph.nodes.begin(), graph.nodes.end()))
              if (!keep.count(n)) graph.erase_node(n);
          } else {
            graph = build_support_graph(obs, target, cfg, *pred, opt.seed,
                                        &report.degree_budget, &rec.query_log);
          }
          graph_built = true;
        }

        pick = next_retrievable(graph, obs);
        if (use_ga) {
          for (int round = 0; round < cfg.max_nodes; ++round) {
            if (!obs.has(pick)) break;
            int added = graph_adjust(obs, graph, pick, cfg, *pred, opt.seed,
                                     &report.degree_budget, &rec.query_log);
            if (added > 0) {
              ++report.adjust_events;
              rec.adjust_added_nodes = true;
              pick = next_retrievable(graph, obs);
              continue;
            }
            break;
          }
        }

        if (graph.direction_cache.count(pick))
          dir_choice = graph.direction_cache.at(pick);
      }

      if (!graph.is_acyclic()) throw std::runtime_error("mutual support detected");

      Action action;
      if (obs.has(pick)) {
        action = select_grasp(obs, pick, dir_choice.dir, cfg.affordance,
                              hash_combine(opt.seed, step));
      } else {
        // committed to an object the camera cannot see; grasp its center
        action = Action{pick, scene.obj(pick).com, GraspPose{}, dir_choice.dir};
      }

      // optional oracle scoring of this step, on the pre-retrieval scene
      if (opt.oracle_eval) {
        detail::OracleStepEval eval{&scene, {}};
        std::map<std::pair<int, std::uint64_t>, std::map<int, double>> by_query;
        for (auto& qr : rec.query_log) {
          if (!scene.is_active(qr.mover) || !scene.is_active(qr.neighbor))
            continue;
          auto dir_key = hash_combine(
              hash_combine(std::llround(qr.dir.x * 1e9),
                           std::llround(qr.dir.y * 1e9)),
              std::llround(qr.dir.z * 1e9));
          auto key = std::make_pair(qr.mover, dir_key);
          auto it = by_query.find(key);
          if (it == by_query.end())
            it = by_query.emplace(key, eval.movement(qr.mover, qr.dir)).first;
          auto jt = it->second.find(qr.neighbor);
          double m = jt == it->second.end() ? 0.0 : jt->second;
          qr.oracle_moves = m > cfg.th_move;
          qr.oracle_valid = true;
          ++report.relation_total;
          if (qr.oracle_moves == qr.predicted_moves) ++report.relation_correct;
        }
        if (opt.variant != PlannerVariant::greedy_top &&
            scene.is_active(pick)) {
          auto candidates = propose_directions(cfg.direction, opt.seed);
          double chosen_total = eval.total(pick, dir_choice.dir);
          double best_total = chosen_total;
          for (const auto& c : candidates)
            best_total = std::min(best_total, eval.total(pick, c));
          rec.direction_evaluated = true;
          rec.direction_optimal = chosen_total <= best_total + cfg.th_move;
          ++report.direction_eval_steps;
          if (rec.direction_optimal) ++report.direction_optimal_steps;
        }
      }

      rec.object_id = pick;
      rec.action = action;
      rec.movements = execute_retrieval_in_place(scene, pick, dir_choice.dir);
      for (const auto& m : rec.movements) {
        report.accumulated_displacement += m.displacement;
        rec.max_other_displacement =
            std::max(rec.max_other_displacement, m.displacement);
      }
      if (rec.max_other_displacement >= cfg.disp_tol) disturbed = true;

      graph.erase_node(pick);
      rec.graph_digest = graph.digest();
      rec.queries = static_cast<int>(graph.query_count - queries_before);
      report.steps.push_back(std::move(rec));

      if (opt.variant != PlannerVariant::greedy_top &&
          graph.query_count > report.degree_budget)
        throw std::logic_error("dynamics query budget exceeded");

      if (pick == target) {
        report.success = !disturbed;
        if (disturbed) report.failure_reason = "disturbance above tolerance";
        break;
      }
      if (step == cfg.max_steps - 1) report.failure_reason = "step limit";
    }
  } catch (const std::exception& e) {
    report.success = false;
    report.failure_reason = e.what();
  }

  report.total_queries = graph.query_count;
  report.total_steps = static_cast<int>(report.steps.size());
  if (!report.success && report.failure_reason.empty())
    report.failure_reason = "target not retrieved";
  return report;
}

}  // namespace clutter
