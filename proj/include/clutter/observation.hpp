#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "clutter/geometry.hpp"
#include "clutter/scene.hpp"

namespace clutter {

struct CameraConfig {
  Vec3 position{0.0, -0.75, 0.55};
  Vec3 look_at{0.0, 0.0, 0.1};
  int res_x = 192;
  int res_y = 192;
  double max_range = 3.0;
  double fov_y_deg = 60.0;

  void validate() const {
    if (dist(position, look_at) < 1e-9)
      throw std::invalid_argument("camera: position equals look_at");
    if (res_x < 32 || res_y < 32)
      throw std::invalid_argument("camera: resolution below 32x32");
  }
};

struct ObservedObject {
  int id = -1;
  ParticleCloud visible_points;
  double visibility_ratio = 0.0;
};

struct Observation {
  std::vector<ObservedObject> objects;
  int step = 0;

  bool has(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return true;
    return false;
  }
  const ObservedObject& get(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return o;
    throw std::out_of_range("observation: unknown object id " +
                            std::to_string(id));
  }
};

struct ObsParams {
  int v_min = 10;  // objects with fewer visible particles are omitted
};

// First-hit visibility by splatting particle disks (radius 0.75h) into a
// z-buffer: a surface particle is visible iff it wins at least one pixel.
// Instance labels are perfect.
inline Observation observe(const SceneState& scene, const CameraConfig& cam,
                           ObsParams obs_params = {}) {
  cam.validate();
  Observation out;

  Vec3 fwd = UnitDir::from(cam.look_at - cam.position).vec();
  Vec3 up0 = std::abs(fwd.z) > 0.99 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
  Vec3 right = UnitDir::from(fwd.cross(up0)).vec();
  Vec3 up = right.cross(fwd);
  const double f_px =
      (cam.res_y / 2.0) / std::tan(cam.fov_y_deg * 3.141592653589793 / 360.0);

  struct Ref {
    int obj_index;
    int particle_index;
  };
  std::vector<Ref> refs;
  std::vector<double> depth_of;
  for (int oi = 0; oi < static_cast<int>(scene.objects.size()); ++oi) {
    const RigidObject& o = scene.objects[oi];
    if (scene.removed.count(o.id)) continue;
    for (int pi = 0; pi < static_cast<int>(o.particles.points.size()); ++pi)
      refs.push_back({oi, pi});
  }

  std::vector<double> zbuf(static_cast<std::size_t>(cam.res_x) * cam.res_y,
                           std::numeric_limits<double>::infinity());
  std::vector<int> owner(zbuf.size(), -1);
  const double splat_r = 0.75 * scene.params.h;

  for (int gid = 0; gid < static_cast<int>(refs.size()); ++gid) {
    const RigidObject& o = scene.objects[refs[gid].obj_index];
    const Vec3& p = o.particles.points[refs[gid].particle_index];
    Vec3 rel = p - cam.position;
    double depth = rel.dot(fwd);
    if (depth < 0.02 || depth > cam.max_range) continue;
    double u = rel.dot(right) / depth * f_px + cam.res_x / 2.0;
    double v = rel.dot(up) / depth * f_px + cam.res_y / 2.0;
    double r_px = std::max(0.6, splat_r * f_px / depth);
    int u0 = static_cast<int>(std::floor(u - r_px));
    int u1 = static_cast<int>(std::ceil(u + r_px));
    int v0 = static_cast<int>(std::floor(v - r_px));
    int v1 = static_cast<int>(std::ceil(v + r_px));
    for (int py = std::max(0, v0); py <= std::min(cam.res_y - 1, v1); ++py)
      for (int px = std::max(0, u0); px <= std::min(cam.res_x - 1, u1); ++px) {
        double du = px + 0.5 - u, dv = py + 0.5 - v;
        if (du * du + dv * dv > r_px * r_px) continue;
        std::size_t idx = static_cast<std::size_t>(py) * cam.res_x + px;
        if (depth < zbuf[idx]) {  // ties keep the earlier (smaller) gid
          zbuf[idx] = depth;
          owner[idx] = gid;
        }
      }
  }

  std::vector<char> visible(refs.size(), 0);
  for (int w : owner)
    if (w >= 0) visible[w] = 1;

  for (int oi = 0; oi < static_cast<int>(scene.objects.size()); ++oi) {
    const RigidObject& o = scene.objects[oi];
    if (scene.removed.count(o.id)) continue;
    ObservedObject obs;
    obs.id = o.id;
    obs.visible_points.spacing_h = scene.params.h;
    for (int gid = 0; gid < static_cast<int>(refs.size()); ++gid) {
      if (refs[gid].obj_index != oi || !visible[gid]) continue;
      obs.visible_points.points.push_back(
          o.particles.points[refs[gid].particle_index]);
    }
    if (static_cast<int>(obs.visible_points.size()) < obs_params.v_min) continue;
    obs.visibility_ratio = static_cast<double>(obs.visible_points.size()) /
                           static_cast<double>(o.particles.size());
    out.objects.push_back(std::move(obs));
  }
  (void)depth_of;
  return out;
}

// Perfect observation: every surface particle of every active object.
inline Observation full_observe(const SceneState& scene) {
  Observation out;
  for (const auto& o : scene.objects) {
    if (scene.removed.count(o.id)) continue;
    out.objects.push_back({o.id, o.particles, 1.0});
  }
  return out;
}

// Objects whose visible clouds come within eps_adj of id's visible cloud.
inline std::set<int> adjacency(const Observation& obs, int id, double eps_adj) {
  const ObservedObject& me = obs.get(id);
  std::set<int> out;
  for (const auto& o : obs.objects) {
    if (o.id == id) continue;
    if (clouds_within(me.visible_points, o.visible_points, eps_adj))
      out.insert(o.id);
  }
  return out;
}

}  // namespace clutter
