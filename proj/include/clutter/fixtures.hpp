#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "clutter/observation.hpp"
#include "clutter/rng.hpp"
#include "clutter/scene.hpp"

namespace clutter {
namespace fixtures {

inline double quant(double v) { return std::round(v * 1e6) / 1e6; }

inline void add_box(SceneState& s, const Vec3& he, const Vec3& pos,
                    const std::string& cat) {
  RigidObject o;
  o.id = static_cast<int>(s.objects.size());
  o.half_extents = {quant(he.x), quant(he.y), quant(he.z)};
  o.pose = {0.0, {quant(pos.x), quant(pos.y), quant(pos.z)}};
  o.category = cat;
  o.refresh_particles(s.params.h);
  s.objects.push_back(std::move(o));
}

inline CameraConfig fixture_camera() { return CameraConfig{}; }

// k boxes stacked dead-center; target is the bottom box (id 0).
inline SceneState make_tower(int k) {
  if (k < 1) throw std::invalid_argument("make_tower: k < 1");
  SceneState s;
  s.preset_name = "fixture_tower";
  const double hz = 0.035;
  const double rest_gap = 1.2 * s.params.h;
  double bottom = s.params.h;
  for (int i = 0; i < k; ++i) {
    add_box(s, {0.05, 0.05, hz}, {0.0, 0.0, bottom + hz}, "block");
    bottom += 2.0 * hz + rest_gap;
  }
  s.target_id = 0;
  return s;
}

inline SceneState make_two_stack() { return make_tower(2); }

// two boxes on the ground with the given face-to-face gap along x
inline SceneState make_side_by_side(double gap) {
  SceneState s;
  s.preset_name = "fixture_side_by_side";
  const double hx = 0.04, hz = 0.03;
  add_box(s, {hx, 0.04, hz}, {-(hx + gap / 2.0), 0.0, s.params.h + hz}, "block");
  add_box(s, {hx, 0.04, hz}, {hx + gap / 2.0, 0.0, s.params.h + hz}, "block");
  s.target_id = 0;
  return s;
}

// Target under a plate overhang: a pillar to one side carries a thin plate
// whose free end hangs just above the target, leaving the opposite side open.
// Straight-up retrieval rams the plate; a shallow lateral escape is clean.
// The seed randomizes dimensions, gaps, and which side is open.
inline SceneState make_overhang(std::uint64_t seed) {
  SceneState s;
  s.preset_name = "fixture_overhang";
  s.rng_seed = seed;
  Rng rng(hash_combine(seed, fnv1a("overhang")));
  const double h = s.params.h;
  const double rest_gap = 1.2 * h;
  const double mirror = rng.chance(0.5) ? -1.0 : 1.0;  // open side: mirror * +x

  const double t_hx = rng.uniform(0.035, 0.045);
  const double t_hy = rng.uniform(0.035, 0.045);
  const double t_hz = rng.uniform(0.025, 0.035);
  const double c = rng.uniform(0.026, 0.0285);  // target-top to plate-bottom
  const double plate_ht = rng.uniform(0.008, 0.011);
  const double edge = rng.uniform(-0.012, 0.002);  // plate free-end x (open side)
  const double pillar_gap = rng.uniform(0.015, 0.024);
  const double pillar_hx = 0.025;
  const double plate_hy = rng.uniform(0.036, 0.05);

  const double target_top = h + 2.0 * t_hz;
  const double pillar_x = -(t_hx + pillar_gap + pillar_hx);
  const double plate_bottom = target_top + c;
  const double pillar_top = plate_bottom - rest_gap;
  const double pillar_hz = (pillar_top - h) / 2.0;
  if (pillar_hz <= 0.01)
    throw std::logic_error("make_overhang: degenerate pillar");
  // plate centered on the pillar so its COM stays over the support
  const double plate_hl = edge - pillar_x;

  add_box(s, {t_hx, t_hy, t_hz}, {0.0, 0.0, h + t_hz}, "target");
  add_box(s, {pillar_hx, plate_hy, pillar_hz},
          {mirror * pillar_x, 0.0, h + pillar_hz}, "pillar");
  add_box(s, {plate_hl, plate_hy, plate_ht},
          {mirror * pillar_x, 0.0, plate_bottom + plate_ht}, "plate");
  s.target_id = 0;
  return s;
}

// Wide base (the target) carrying a tall box on its camera side and a small
// box on its far side; from the default camera the small box is fully hidden
// until the tall one is gone.
inline SceneState make_occluded_base() {
  SceneState s;
  s.preset_name = "fixture_occluded_base";
  const double rest_gap = 1.2 * s.params.h;

  const Vec3 base_he{0.09, 0.13, 0.03};
  const double base_top = s.params.h + 2.0 * base_he.z;
  add_box(s, base_he, {0.0, 0.0, s.params.h + base_he.z}, "base");

  const Vec3 occ_he{0.07, 0.045, 0.065};
  add_box(s, occ_he,
          {0.0, -(base_he.y - occ_he.y - 0.018), base_top + rest_gap + occ_he.z},
          "tall");

  const Vec3 hid_he{0.045, 0.035, 0.012};
  add_box(s, hid_he,
          {0.0, base_he.y - hid_he.y - 0.018, base_top + rest_gap + hid_he.z},
          "small");

  s.target_id = 0;
  return s;
}

// occluded_base plus a second hidden box stacked on the first: discovering it
// takes a recursive expansion from a node that was itself just discovered
inline SceneState make_double_occlusion() {
  SceneState s = make_occluded_base();
  s.preset_name = "fixture_double_occlusion";
  const RigidObject& hid = s.objects.back();
  const double hid_top = hid.pose.pos.z + hid.half_extents.z;
  add_box(s, {0.028, 0.022, 0.01},
          {0.0, hid.pose.pos.y, hid_top + 1.2 * s.params.h + 0.01}, "tiny");
  return s;
}

inline SceneState by_name(const std::string& name, std::uint64_t seed = 0) {
  if (name == "tower3") return make_tower(3);
  if (name == "two_stack") return make_two_stack();
  if (name == "side_by_side") return make_side_by_side(0.04);
  if (name == "overhang") return make_overhang(seed);
  if (name == "occluded_base") return make_occluded_base();
  if (name == "double_occlusion") return make_double_occlusion();
  throw std::invalid_argument("unknown fixture: " + name);
}

inline std::vector<std::string> names() {
  return {"tower3",   "two_stack",     "side_by_side",
          "overhang", "occluded_base", "double_occlusion"};
}

}  // namespace fixtures
}  // namespace clutter
