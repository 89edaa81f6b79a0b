#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "clutter/dynamics.hpp"
#include "clutter/geometry.hpp"
#include "clutter/observation.hpp"
#include "clutter/rng.hpp"
#include "clutter/support_graph.hpp"

namespace clutter {

struct DirectionConfig {
  int q = 64;                                  // candidate count
  double elevation_floor = 15.0 * 3.141592653589793 / 180.0;
  double tie_tol = 1e-9;
};

struct DirectionCandidate {
  UnitDir dir;
  double safety = 1.0;  // 1 / (1 + sum of predicted neighbor magnitudes)
};

// Deterministic candidate set: +z first, then a Fibonacci-spiral
// stratification of the upper hemisphere above the elevation floor. The seed
// only rotates the spiral's azimuthal phase.
inline std::vector<UnitDir> propose_directions(const DirectionConfig& cfg,
                                               std::uint64_t seed) {
  if (cfg.q < 1) throw std::invalid_argument("propose_directions: q < 1");
  std::vector<UnitDir> out;
  out.push_back(UnitDir::plus_z());
  if (cfg.q == 1) return out;
  const double golden = 3.141592653589793 * (3.0 - std::sqrt(5.0));
  const double phase =
      2.0 * 3.141592653589793 *
      (static_cast<double>(hash_u64(seed) >> 11) * 0x1.0p-53);
  const double z_min = std::sin(std::clamp(cfg.elevation_floor, 0.0,
                                           3.141592653589793 / 2.0));
  const int m = cfg.q - 1;
  for (int i = 0; i < m; ++i) {
    double z = z_min + (1.0 - z_min) * (i + 0.5) / m;
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    double az = phase + golden * i;
    out.push_back(UnitDir{rho * std::cos(az), rho * std::sin(az), z});
  }
  return out;
}

// safety = 1 / (1 + sum over adjacent neighbors of predicted movement)
inline double score_direction(const Observation& obs, int mover_id,
                              const UnitDir& d,
                              const DynamicsPredictor& predictor,
                              double eps_adj, int r) {
  double total = 0.0;
  for (int j : adjacency(obs, mover_id, eps_adj)) {
    auto q = make_query(obs, mover_id, j, d, r, eps_adj);
    total += std::max(0.0, predictor.predict(q).magnitude);
  }
  return 1.0 / (1.0 + total);
}

// Argmax of safety over the candidate set; ties within tie_tol broken by
// smallest angle to +z, then by candidate index. Adjacent neighbors are
// scored through the predictor; every other visible object contributes a
// geometric swept-contact penalty, so a retrieval path through distant
// clutter is never rated safe.
inline DirectionChoice best_direction(const Observation& obs, int mover_id,
                                      const DirectionConfig& cfg,
                                      const DynamicsPredictor& predictor,
                                      double eps_adj, int r,
                                      std::uint64_t seed) {
  auto candidates = propose_directions(cfg, seed);

  // downsample each neighbor pair once; only the direction varies
  std::set<int> adj = adjacency(obs, mover_id, eps_adj);
  std::vector<DynamicsQuery> queries;
  for (int j : adj)
    queries.push_back(
        make_query(obs, mover_id, j, UnitDir::plus_z(), r, eps_adj));

  // The corridor screen is a coarse go/no-go filter, so it runs on small
  // clouds with a coarse step; the per-neighbor scores above stay exact.
  const std::size_t corridor_r =
      static_cast<std::size_t>(std::clamp(r, 1, 64));
  const ParticleCloud mover_fps =
      farthest_point_sample(obs.get(mover_id).visible_points, corridor_r);
  const double h = mover_fps.spacing_h;
  std::vector<ParticleCloud> far_clouds;
  for (const auto& o : obs.objects)
    if (o.id != mover_id && !adj.count(o.id))
      far_clouds.push_back(farthest_point_sample(o.visible_points, corridor_r));

  const DynamicsParams sweep_params;
  const double corridor_step = 4.0 * h;
  DirectionChoice best;
  double best_angle = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double total = 0.0;
    for (auto& q : queries) {
      q.direction = candidates[i];
      total += std::max(0.0, predictor.predict(q).magnitude);
    }
    for (const auto& fc : far_clouds) {
      auto hit = sweep_contact(mover_fps, fc, candidates[i], corridor_step,
                               sweep_params.sweep_len, 1.0 * h);
      if (hit) total += sweep_params.sweep_len - *hit;
    }
    double safety = 1.0 / (1.0 + total);
    double angle = candidates[i].angle_to(UnitDir::plus_z());
    bool better = first || safety > best.safety + cfg.tie_tol ||
                  (safety > best.safety - cfg.tie_tol && angle < best_angle);
    if (better) {
      best = {candidates[i], safety};
      best_angle = angle;
      first = false;
    }
  }
  return best;
}

}  // namespace clutter
