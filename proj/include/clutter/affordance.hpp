#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "clutter/geometry.hpp"
#include "clutter/observation.hpp"
#include "clutter/rng.hpp"

namespace clutter {

struct AffordanceConfig {
  double eps_x = 0.05;          // neighborhood radius for influence
  double sigma = 0.05 / 3.0;    // influence decay length
  double gripper_width = 0.08;  // w_g
  double corridor_radius = 0.015;  // g_r
  double corridor_length = 0.12;   // g_l
  int pose_samples = 32;
};

struct GraspPoint {
  Vec3 position;
  double score = 0.0;
};

struct GraspPose {
  UnitDir approach = UnitDir::plus_z();  // points away from the grasp point
  double roll = 0.0;
};

struct Action {
  int object_id = -1;
  Vec3 grasp_point;
  GraspPose pose;
  UnitDir retrieval_dir = UnitDir::plus_z();
};

namespace detail {

inline const Vec3* find_point(const ParticleCloud& cloud, const Vec3& p) {
  for (const auto& q : cloud.points)
    if (dist2(q, p) < 1e-16) return &q;
  return nullptr;
}

// Surface normal estimate at p: smallest-variance axis of the local
// neighborhood (PCA via a few Jacobi sweeps), oriented away from the cloud
// centroid. Fails only on neighborhoods too small to define a plane.
inline bool estimate_normal(const ParticleCloud& cloud, const Vec3& p,
                            Vec3* out) {
  const double rad = 2.5 * cloud.spacing_h;
  Vec3 mean;
  int n = 0;
  for (const auto& q : cloud.points)
    if (dist2(q, p) <= rad * rad) {
      mean += q;
      ++n;
    }
  if (n < 4) return false;
  mean = mean * (1.0 / n);

  double c[3][3] = {};
  for (const auto& q : cloud.points) {
    if (dist2(q, p) > rad * rad) continue;
    Vec3 d = q - mean;
    double v[3] = {d.x, d.y, d.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i][j] += v[i] * v[j];
  }

  // Jacobi eigendecomposition of the 3x3 covariance
  double vmat[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 16; ++sweep) {
    double off = std::abs(c[0][1]) + std::abs(c[0][2]) + std::abs(c[1][2]);
    if (off < 1e-18) break;
    for (int pq = 0; pq < 3; ++pq) {
      int i = pq == 0 ? 0 : pq == 1 ? 0 : 1;
      int j = pq == 0 ? 1 : pq == 1 ? 2 : 2;
      if (std::abs(c[i][j]) < 1e-20) continue;
      double theta = 0.5 * std::atan2(2.0 * c[i][j], c[i][i] - c[j][j]);
      double cs = std::cos(theta), sn = std::sin(theta);
      for (int k = 0; k < 3; ++k) {
        double cik = c[i][k], cjk = c[j][k];
        c[i][k] = cs * cik + sn * cjk;
        c[j][k] = -sn * cik + cs * cjk;
      }
      for (int k = 0; k < 3; ++k) {
        double cki = c[k][i], ckj = c[k][j];
        c[k][i] = cs * cki + sn * ckj;
        c[k][j] = -sn * cki + cs * ckj;
      }
      for (int k = 0; k < 3; ++k) {
        double vki = vmat[k][i], vkj = vmat[k][j];
        vmat[k][i] = cs * vki + sn * vkj;
        vmat[k][j] = -sn * vki + cs * vkj;
      }
    }
  }
  int smallest = 0;
  if (c[1][1] < c[smallest][smallest]) smallest = 1;
  if (c[2][2] < c[smallest][smallest]) smallest = 2;
  Vec3 dir{vmat[0][smallest], vmat[1][smallest], vmat[2][smallest]};
  if (dir.norm() < 1e-9) return false;
  Vec3 outward = p - cloud.centroid();
  if (outward.norm() > 1e-12 && dir.dot(outward) < 0.0) dir = dir * -1.0;
  *out = UnitDir::from(dir).vec();
  return true;
}

}  // namespace detail

// Graspability of point p on the object: clamp(1 - thickness/w_g, 0, 1) where
// thickness is the visible-cloud extent along the estimated surface normal.
// Degenerate normals (isolated points) score 0.
inline double preliminary_score(const Observation& obs, int object_id,
                                const Vec3& p, const AffordanceConfig& cfg) {
  const ObservedObject& o = obs.get(object_id);
  if (!detail::find_point(o.visible_points, p))
    throw std::out_of_range("preliminary_score: point not on object");
  Vec3 normal;
  // isolated points (common on sparsely visible objects) have no usable
  // surface plane and are simply not graspable
  if (!detail::estimate_normal(o.visible_points, p, &normal)) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& q : o.visible_points.points) {
    double t = q.dot(normal);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  double thickness = hi - lo;
  return std::clamp(1.0 - thickness / cfg.gripper_width, 0.0, 1.0);
}

inline double influence_score(const Vec3& p, const Vec3& p_j,
                              const AffordanceConfig& cfg) {
  return std::exp(-dist(p, p_j) / cfg.sigma);
}

// Per-point affordance: preliminary score minus the maximum influence of
// other-object points within eps_x. Sorted descending by score, ties by
// lexicographic position.
inline std::vector<GraspPoint> affordance_map(const Observation& obs,
                                              int object_id,
                                              const AffordanceConfig& cfg) {
  const ObservedObject& o = obs.get(object_id);

  PointGrid others(cfg.eps_x);
  for (const auto& other : obs.objects) {
    if (other.id == object_id) continue;
    for (const auto& q : other.visible_points.points) others.insert(q, other.id);
  }

  std::vector<GraspPoint> out;
  out.reserve(o.visible_points.size());
  for (const auto& p : o.visible_points.points) {
    double s = preliminary_score(obs, object_id, p, cfg);
    double max_influence = 0.0;
    others.for_neighbors(p, cfg.eps_x, [&](const Vec3& q, int) {
      if (dist(p, q) < cfg.eps_x)
        max_influence = std::max(max_influence, influence_score(p, q, cfg));
    });
    out.push_back({p, s - max_influence});
  }
  std::sort(out.begin(), out.end(), [](const GraspPoint& a, const GraspPoint& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.position.x, a.position.y, a.position.z) <
           std::tie(b.position.x, b.position.y, b.position.z);
  });
  return out;
}

namespace detail {

inline double point_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double t = std::clamp((p - a).dot(ab) / std::max(ab.norm2(), 1e-18), 0.0, 1.0);
  return dist(p, a + ab * t);
}

// approach axis candidates: the retrieval direction, +z, then cones around
// both at 20 and 40 degrees with golden-angle azimuths
inline std::vector<UnitDir> approach_candidates(const UnitDir& retrieval_dir,
                                                int count, std::uint64_t seed) {
  std::vector<UnitDir> out{retrieval_dir, UnitDir::plus_z()};
  const double golden = 3.141592653589793 * (3.0 - std::sqrt(5.0));
  double phase = 2.0 * 3.141592653589793 *
                 (static_cast<double>(hash_u64(seed) >> 11) * 0x1.0p-53);
  auto around = [&](const UnitDir& axis, double tilt, int k, int n) {
    Vec3 a = axis.vec();
    Vec3 ref = std::abs(a.z) > 0.99 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
    Vec3 u = UnitDir::from(a.cross(ref)).vec();
    Vec3 v = a.cross(u);
    double az = phase + golden * k;
    Vec3 dir = a * std::cos(tilt) +
               (u * std::cos(az) + v * std::sin(az)) * std::sin(tilt);
    (void)n;
    return UnitDir::from(dir);
  };
  int k = 0;
  while (static_cast<int>(out.size()) < count) {
    double tilt = (k % 2 == 0) ? 20.0 * 3.141592653589793 / 180.0
                               : 40.0 * 3.141592653589793 / 180.0;
    out.push_back(around(k % 4 < 2 ? retrieval_dir : UnitDir::plus_z(), tilt,
                         k, count));
    ++k;
  }
  return out;
}

}  // namespace detail

// Walk the affordance map in score order and return the first grasp whose
// approach corridor (cylinder g_r x g_l extending from the point along the
// approach axis) contains no particles of other objects.
inline Action select_grasp(const Observation& obs, int object_id,
                           const UnitDir& retrieval_dir,
                           const AffordanceConfig& cfg, std::uint64_t seed) {
  auto points = affordance_map(obs, object_id, cfg);
  if (points.empty()) throw std::runtime_error("object unreachable");

  std::vector<Vec3> other_points;
  for (const auto& other : obs.objects) {
    if (other.id == object_id) continue;
    for (const auto& q : other.visible_points.points) other_points.push_back(q);
  }
  auto poses = detail::approach_candidates(retrieval_dir, cfg.pose_samples, seed);

  const double h = obs.get(object_id).visible_points.spacing_h;
  for (const auto& gp : points) {
    for (std::size_t pi = 0; pi < poses.size(); ++pi) {
      Vec3 a = gp.position + poses[pi].vec() * h;
      Vec3 b = gp.position + poses[pi].vec() * cfg.corridor_length;
      Aabb corridor;
      corridor.grow(a);
      corridor.grow(b);
      corridor = corridor.inflated(cfg.corridor_radius);
      bool blocked = false;
      for (const auto& q : other_points) {
        if (q.x < corridor.lo.x || q.x > corridor.hi.x ||
            q.y < corridor.lo.y || q.y > corridor.hi.y ||
            q.z < corridor.lo.z || q.z > corridor.hi.z)
          continue;
        if (detail::point_to_segment(q, a, b) < cfg.corridor_radius) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        double roll =
            2.0 * 3.141592653589793 *
            (static_cast<double>(hash_u64(hash_combine(seed, pi)) >> 11) *
             0x1.0p-53);
        return Action{object_id, gp.position, {poses[pi], roll}, retrieval_dir};
      }
    }
  }
  throw std::runtime_error("object unreachable");
}

}  // namespace clutter
