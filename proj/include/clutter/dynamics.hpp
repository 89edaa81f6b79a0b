#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "clutter/geometry.hpp"
#include "clutter/observation.hpp"
#include "clutter/scene.hpp"

namespace clutter {

struct DynamicsQuery {
  int mover_id = -1;
  int neighbor_id = -1;
  UnitDir direction = UnitDir::plus_z();
  ParticleCloud mover_cloud;     // downsampled, <= r points
  ParticleCloud neighbor_cloud;  // downsampled, <= r points
};

struct MovementPrediction {
  bool moves = false;
  double magnitude = 0.0;  // meters
};

struct DynamicsParams {
  int r = 256;               // farthest-point sample size per cloud
  double th_move = 0.005;
  double rho_support = 0.5;  // mover fraction of bottom-band support
  double gap_cap = 0.3;      // cap on estimated drop
  double sweep_len = 1.0;    // assumed retrieval travel (scene-scale constant)
  double sweep_step = 0.005;
};

// Downsample the two visible clouds with farthest-point sampling. Refuses
// non-adjacent pairs: the predictor is local by contract.
inline DynamicsQuery make_query(const Observation& obs, int mover_id,
                                int neighbor_id, const UnitDir& d, int r,
                                double eps_adj) {
  if (mover_id == neighbor_id)
    throw std::invalid_argument("make_query: mover == neighbor");
  const ObservedObject& mover = obs.get(mover_id);
  const ObservedObject& neighbor = obs.get(neighbor_id);
  if (!clouds_within(mover.visible_points, neighbor.visible_points, eps_adj))
    throw std::runtime_error("non-local query refused");
  DynamicsQuery q;
  q.mover_id = mover_id;
  q.neighbor_id = neighbor_id;
  q.direction = d;
  q.mover_cloud = farthest_point_sample(
      mover.visible_points, static_cast<std::size_t>(std::max(1, r)));
  q.neighbor_cloud = farthest_point_sample(
      neighbor.visible_points, static_cast<std::size_t>(std::max(1, r)));
  return q;
}

class DynamicsPredictor {
 public:
  virtual ~DynamicsPredictor() = default;
  virtual MovementPrediction predict(const DynamicsQuery& q) const = 0;
};

// Geometric stand-in for the learned local-dynamics model. Depends only on
// the two clouds, the direction, and the ground plane:
//  - support loss: among neighbor bottom-band particles, the fraction whose
//    support comes from the mover (and not the ground) decides a drop;
//  - sweep hit: translating the mover cloud along d until it grazes the
//    neighbor cloud gives a push estimate of sweep_len - contact distance.
class GeometricPredictor : public DynamicsPredictor {
 public:
  explicit GeometricPredictor(DynamicsParams params = {}) : p_(params) {}

  MovementPrediction predict(const DynamicsQuery& q) const override {
    const double h = q.neighbor_cloud.spacing_h;
    // tolerances widened for downsampled clouds
    const double lateral = 2.0 * h;
    const double dz_min = 0.1 * h;
    // reaches one band height above the lowest point plus the resting gap
    const double dz_max = 2.5 * h;
    const double ground_band = 2.0 * h;

    double magnitude = 0.0;

    if (!q.neighbor_cloud.empty() && !q.mover_cloud.empty()) {
      PointGrid mover_grid(2.0 * h);
      for (const auto& mp : q.mover_cloud.points) mover_grid.insert(mp, 0);

      // band membership is tighter than the support search so short objects
      // don't dilute the supported fraction with their upper points
      const double nz = q.neighbor_cloud.min_z();
      const double band_top = nz + 1.0 * h;
      int band = 0, mover_only = 0;
      for (const auto& np : q.neighbor_cloud.points) {
        if (np.z > band_top) continue;
        ++band;
        if (np.z <= ground_band) continue;  // ground-supported
        bool from_mover = false;
        mover_grid.for_neighbors(np, dz_max + lateral, [&](const Vec3& mp, int) {
          if (from_mover) return;
          double dz = np.z - mp.z;
          if (dz < dz_min || dz > dz_max) return;
          double dx = np.x - mp.x, dy = np.y - mp.y;
          if (dx * dx + dy * dy <= lateral * lateral) from_mover = true;
        });
        if (from_mover) ++mover_only;
      }
      bool support_loss =
          band > 0 &&
          static_cast<double>(mover_only) / static_cast<double>(band) >=
              p_.rho_support;

      // Fallback for occluded bottom bands: a neighbor whose visible cloud
      // bottoms out at the mover's top and mostly overlies the mover's
      // footprint is resting on it even if its contact points are hidden.
      if (!support_loss && nz > ground_band) {
        double mover_top = -std::numeric_limits<double>::infinity();
        Aabb mover_xy;
        for (const auto& mp : q.mover_cloud.points) {
          mover_top = std::max(mover_top, mp.z);
          mover_xy.grow(mp);
        }
        if (nz - mover_top >= -0.5 * h && nz - mover_top <= dz_max) {
          Aabb foot = mover_xy.inflated(lateral);
          Vec3 c = q.neighbor_cloud.centroid();
          support_loss = c.x >= foot.lo.x && c.x <= foot.hi.x &&
                         c.y >= foot.lo.y && c.y <= foot.hi.y;
        }
      }

      if (support_loss) {
        magnitude = std::min(std::max(nz - h, 0.0), p_.gap_cap);
        magnitude = std::max(magnitude, 2.0 * p_.th_move);  // drop floor
      }

      auto hit = sweep_contact(q.mover_cloud, q.neighbor_cloud, q.direction,
                               p_.sweep_step, p_.sweep_len, 1.0 * h);
      if (hit) magnitude = std::max(magnitude, p_.sweep_len - *hit);
    }

    return {magnitude > p_.th_move, magnitude};
  }

  const DynamicsParams& params() const { return p_; }

 private:
  DynamicsParams p_;
};

// Test/benchmark predictor answering from the simulator: the neighbor's
// displacement is the larger of its true sweep push along d and its drop in
// the settle after removing the mover. Caches per (mover, direction) and
// invalidates when the scene advances.
class OracleBackedPredictor : public DynamicsPredictor {
 public:
  explicit OracleBackedPredictor(const SceneState* scene, double th_move = 0.005)
      : scene_(scene), th_move_(th_move) {}

  MovementPrediction predict(const DynamicsQuery& q) const override {
    const auto& moves = lookup(q.mover_id, q.direction);
    auto it = moves.find(q.neighbor_id);
    double m = it == moves.end() ? 0.0 : it->second;
    return {m > th_move_, m};
  }

 private:
  struct Key {
    int mover;
    std::int64_t dx, dy, dz;
    bool operator<(const Key& o) const {
      return std::tie(mover, dx, dy, dz) < std::tie(o.mover, o.dx, o.dy, o.dz);
    }
  };

  const std::map<int, double>& lookup(int mover, const UnitDir& d) const {
    std::size_t stamp = scene_->removed.size();
    if (stamp != stamp_) {
      cache_.clear();
      removal_cache_.clear();
      stamp_ = stamp;
    }
    auto qz = [](double v) { return std::llround(v * 1e9); };
    Key k{mover, qz(d.x), qz(d.y), qz(d.z)};
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    // The answer combines two exact simulator primitives: push distances
    // from the true sweep along d, and drop distances from the
    // direction-independent settle after removing the mover (computed once
    // per mover). Directions whose sweep touches nothing reduce to the
    // removal settle alone.
    auto rit = removal_cache_.find(mover);
    if (rit == removal_cache_.end()) {
      SceneState clone = *scene_;
      clone.removed.insert(mover);
      std::map<int, double> m;
      for (int id : scene_->active_ids())
        if (id != mover) m[id] = 0.0;
      for (const auto& r : settle_in_place(clone))
        m[r.object_id] = r.displacement;
      rit = removal_cache_.emplace(mover, std::move(m)).first;
    }
    std::map<int, double> result = rit->second;
    if (!sweep_provably_clear(*scene_, mover, d))
      for (const auto& [id, push] : oracle_sweep_pushes(*scene_, mover, d))
        result[id] = std::max(result[id], push);
    return cache_.emplace(k, std::move(result)).first->second;
  }

  const SceneState* scene_;
  double th_move_;
  mutable std::map<Key, std::map<int, double>> cache_;
  mutable std::map<int, std::map<int, double>> removal_cache_;
  mutable std::size_t stamp_ = static_cast<std::size_t>(-1);
};

}  // namespace clutter
