#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clutter/geometry.hpp"
#include "clutter/rng.hpp"
#include "clutter/support_graph.hpp"

namespace clutter {

// Simulation constants. All contact semantics are particle-based: surfaces
// are sampled at spacing h and "touching" is a distance band around h.
struct SceneParams {
  double h = 0.01;              // particle spacing
  double th_move = 0.005;       // movement threshold for support edges
  double delta_settle = 0.005;  // settle drop step
  double delta_sweep = 0.005;   // retrieval sweep step
  double contact_margin() const { return 1.5 * h; }
  double push_margin() const { return 0.5 * h; }
  double lateral_tol() const { return 1.5 * h; }
  double support_tol() const { return h; }
  int settle_pass_cap = 4000;
};

struct Pose {
  double yaw = 0.0;  // rotation about +z
  Vec3 pos;          // box center, world frame
};

inline Vec3 rotate_z(const Vec3& p, double yaw) {
  double c = std::cos(yaw), s = std::sin(yaw);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

// Surface particle cloud of a box with the given half extents, local frame,
// spacing h. Deterministic; edge/corner duplicates removed.
inline ParticleCloud box_surface_cloud(const Vec3& he, double h) {
  if (!(he.x > 0 && he.y > 0 && he.z > 0))
    throw std::invalid_argument("box_surface_cloud: non-positive extents");
  ParticleCloud out;
  out.spacing_h = h;
  std::set<std::tuple<long, long, long>> seen;
  auto push = [&](double x, double y, double z) {
    auto q = [&](double v) { return std::lround(v / (h * 0.25)); };
    if (seen.insert({q(x), q(y), q(z)}).second) out.points.push_back({x, y, z});
  };
  auto steps = [&](double half) {
    int n = std::max(1, static_cast<int>(std::lround(2.0 * half / h)));
    std::vector<double> v;
    for (int i = 0; i <= n; ++i) v.push_back(-half + 2.0 * half * i / n);
    return v;
  };
  auto xs = steps(he.x), ys = steps(he.y), zs = steps(he.z);
  for (double x : xs)
    for (double y : ys) {
      push(x, y, -he.z);
      push(x, y, he.z);
    }
  for (double x : xs)
    for (double z : zs) {
      push(x, -he.y, z);
      push(x, he.y, z);
    }
  for (double y : ys)
    for (double z : zs) {
      push(-he.x, y, z);
      push(he.x, y, z);
    }
  return out;
}

struct RigidObject {
  int id = -1;
  Vec3 half_extents;
  Pose pose;
  std::string category;
  ParticleCloud particles;  // world frame, derived from shape + pose
  Vec3 com;                 // world frame (box center)

  void refresh_particles(double h) {
    particles = box_surface_cloud(half_extents, h);
    for (auto& p : particles.points) p = rotate_z(p, pose.yaw) + pose.pos;
    com = pose.pos;
  }
  void translate(const Vec3& t) {
    pose.pos += t;
    com += t;
    particles.translate(t);
  }
};

struct MovementRecord {
  int object_id = -1;
  double displacement = 0.0;      // meters, path length
  double rotation_change = 0.0;   // radians; always 0 (rigid translations only)
};

struct SceneState {
  std::vector<RigidObject> objects;
  int target_id = -1;
  std::uint64_t rng_seed = 0;
  std::string preset_name;
  std::set<int> removed;
  SceneParams params;
  bool borderline_settle = false;  // set when settle rested an unstable contact

  const RigidObject& obj(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return o;
    throw std::out_of_range("unknown object id " + std::to_string(id));
  }
  RigidObject& obj(int id) {
    return const_cast<RigidObject&>(std::as_const(*this).obj(id));
  }
  bool is_active(int id) const {
    if (removed.count(id)) return false;
    for (const auto& o : objects)
      if (o.id == id) return true;
    return false;
  }
  std::vector<int> active_ids() const {
    std::vector<int> out;
    for (const auto& o : objects)
      if (!removed.count(o.id)) out.push_back(o.id);
    return out;
  }
  Aabb active_aabb(int exclude = -1) const {
    Aabb b;
    for (const auto& o : objects)
      if (!removed.count(o.id) && o.id != exclude) b.grow(o.particles.aabb());
    return b;
  }
};

namespace detail {

inline PointGrid build_particle_grid(const SceneState& s, int exclude) {
  PointGrid grid(2.0 * s.params.h);
  for (const auto& o : s.objects) {
    if (s.removed.count(o.id) || o.id == exclude) continue;
    for (const auto& p : o.particles.points) grid.insert(p, o.id);
  }
  return grid;
}

// Support contacts of obj against ground and the other-object grid: bottom
// band particles with a supporter directly below within the contact band.
// The grid may contain obj's own particles; they are skipped by payload id.
inline std::vector<Vec2> support_contacts(const SceneState& s,
                                          const RigidObject& obj,
                                          const PointGrid& grid) {
  const SceneParams& pp = s.params;
  const double cm = pp.contact_margin();
  const double lt = pp.lateral_tol();
  const double band = obj.particles.min_z() + cm + pp.h;
  std::vector<Vec2> contacts;
  for (const auto& p : obj.particles.points) {
    if (p.z > band) continue;
    if (p.z <= cm) {
      contacts.push_back({p.x, p.y});
      continue;
    }
    bool supported = false;
    grid.for_neighbors(p, cm + lt, [&](const Vec3& q, int id) {
      if (supported || id == obj.id) return;
      double dz = p.z - q.z;
      if (dz < 0.25 * pp.h || dz > cm) return;
      double dx = p.x - q.x, dy = p.y - q.y;
      if (dx * dx + dy * dy <= lt * lt) supported = true;
    });
    if (supported) contacts.push_back({p.x, p.y});
  }
  return contacts;
}

inline bool is_stable(const SceneState& s, const RigidObject& obj,
                      const PointGrid& grid) {
  auto contacts = support_contacts(s, obj, grid);
  if (contacts.empty()) return false;
  return support_polygon_contains({obj.com.x, obj.com.y}, contacts,
                                  s.params.support_tol());
}

inline bool drop_blocked(const SceneState& s, const RigidObject& obj,
                         const PointGrid& grid, double step) {
  const double pm = s.params.push_margin();
  for (const auto& p : obj.particles.points) {
    Vec3 np{p.x, p.y, p.z - step};
    if (np.z < -0.25 * s.params.h) return true;  // ground
    bool hit = false;
    grid.for_neighbors(np, pm, [&](const Vec3&, int id) {
      if (id != obj.id) hit = true;
    });
    if (hit) return true;
  }
  return false;
}

}  // namespace detail

// Quasi-static settle to fixpoint, in place. Objects are processed in
// ascending height of their lowest particle; an unstable object drops in
// steps of delta_settle until a contact stabilizes it, the drop is blocked,
// or it reaches the ground. Returns per-object total displacement (moved
// objects only).
inline std::vector<MovementRecord> settle_in_place(SceneState& s) {
  const SceneParams& pp = s.params;
  std::map<int, double> disp;
  bool moved_any = true;
  int passes = 0;
  while (moved_any) {
    if (++passes > pp.settle_pass_cap) throw std::runtime_error("settle divergence");
    moved_any = false;
    std::vector<int> order = s.active_ids();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double za = s.obj(a).particles.min_z(), zb = s.obj(b).particles.min_z();
      return za < zb || (za == zb && a < b);
    });
    PointGrid grid = detail::build_particle_grid(s, -1);
    for (int id : order) {
      RigidObject& obj = s.obj(id);
      int inner = 0;
      bool dropped = false;
      while (!detail::is_stable(s, obj, grid)) {
        if (++inner > pp.settle_pass_cap)
          throw std::runtime_error("settle divergence");
        double step = std::min(pp.delta_settle, obj.particles.min_z());
        if (step <= 1e-12) break;  // on the ground
        if (detail::drop_blocked(s, obj, grid, step)) {
          s.borderline_settle = true;  // resting on an unstable contact
          break;
        }
        obj.translate({0.0, 0.0, -step});
        disp[id] += step;
        moved_any = true;
        dropped = true;
        // obj's own grid entries are stale now, but they are skipped by
        // payload id, so the grid stays valid while obj drops
      }
      if (dropped) grid = detail::build_particle_grid(s, -1);
    }
  }
  std::vector<MovementRecord> records;
  for (const auto& [id, d] : disp)
    if (d > 0.0) records.push_back({id, d, 0.0});
  return records;
}

inline std::pair<SceneState, std::vector<MovementRecord>> settle(
    const SceneState& s) {
  SceneState out = s;
  auto rec = settle_in_place(out);
  return {std::move(out), std::move(rec)};
}

// Kinematic retrieval: sweep object_id along d in steps of delta_sweep until
// its AABB clears the initial bounding box of the remaining objects; contacts
// en route rigidly push the touched objects along d; then the object is
// marked removed and the scene settles. Returns movement records of all
// OTHER objects (pushes + settle).
namespace detail {

// Sweep phase of a retrieval: translate object_id along d until its AABB
// clears the inflated bounding box of the remaining objects, carrying every
// contacted object along (transitively). Accumulates push distances into
// disp. Once the swept AABB of the carried group over the remaining travel
// provably misses every other object, contact checks are skipped.
inline void sweep_retrieval(SceneState& s, int object_id, const UnitDir& d,
                            std::map<int, double>& disp) {
  const SceneParams& pp = s.params;
  Aabb others = s.active_aabb(object_id);
  if (!others.valid()) return;
  Aabb exit_box = others.inflated(pp.contact_margin() + pp.h);
  RigidObject& mover = s.obj(object_id);
  Vec3 dv = d.vec();
  double diag = exit_box.diagonal().norm();
  long guard = static_cast<long>(4.0 * diag / pp.delta_sweep) + 200;
  std::set<int> carried{object_id};
  // smallest number of further steps after which the mover AABB no longer
  // overlaps the exit box (it currently does)
  auto steps_to_exit = [&]() {
    Aabb m = mover.particles.aabb();
    double t_exit = std::numeric_limits<double>::infinity();
    auto axis = [&](double mlo, double mhi, double elo, double ehi, double v) {
      if (v > 1e-12) t_exit = std::min(t_exit, (ehi - mlo) / v);
      if (v < -1e-12) t_exit = std::min(t_exit, (elo - mhi) / v);
    };
    axis(m.lo.x, m.hi.x, exit_box.lo.x, exit_box.hi.x, dv.x);
    axis(m.lo.y, m.hi.y, exit_box.lo.y, exit_box.hi.y, dv.y);
    axis(m.lo.z, m.hi.z, exit_box.lo.z, exit_box.hi.z, dv.z);
    long k = std::max(0l, static_cast<long>(
                              std::floor(t_exit / pp.delta_sweep)) - 2);
    while (k < guard &&
           m.shifted(dv * (pp.delta_sweep * static_cast<double>(k)))
               .overlaps(exit_box))
      ++k;
    return k;
  };
  for (long step = 0; step < guard; ++step) {
    if (!mover.particles.aabb().overlaps(exit_box)) break;
    Vec3 dstep = dv * pp.delta_sweep;
    {
      Aabb group;
      for (int a : carried) group.grow(s.obj(a).particles.aabb());
      long k_rem = steps_to_exit();
      double travel_rem = pp.delta_sweep * static_cast<double>(k_rem);
      Aabb swept = group;
      swept.grow(group.shifted(dv * travel_rem));
      swept = swept.inflated(pp.push_margin() + 1e-9);
      bool clear = true;
      for (int o : s.active_ids())
        if (!carried.count(o) && swept.overlaps(s.obj(o).particles.aabb())) {
          clear = false;
          break;
        }
      if (clear) {
        // nothing left to touch: jump the carried group to the exit
        Vec3 jump = dv * travel_rem;
        for (int a : carried) {
          s.obj(a).translate(jump);
          if (a != object_id) disp[a] += travel_rem;
        }
        break;
      }
    }
    for (int a : carried) {
      s.obj(a).translate(dstep);
      if (a != object_id) disp[a] += pp.delta_sweep;
    }
    {
      // push cascade: anything within push_margin of a moved object is
      // carried along by the same step, transitively
      std::vector<int> queue(carried.begin(), carried.end());
      while (!queue.empty()) {
        int a = queue.back();
        queue.pop_back();
        const ParticleCloud& ac = s.obj(a).particles;
        for (int o : s.active_ids()) {
          if (carried.count(o)) continue;
          if (!clouds_within(ac, s.obj(o).particles, pp.push_margin())) continue;
          s.obj(o).translate(dstep);
          disp[o] += pp.delta_sweep;
          carried.insert(o);
          queue.push_back(o);
        }
      }
    }
    if (step == guard - 1) throw std::runtime_error("sweep overflow");
  }
}

}  // namespace detail

inline std::vector<MovementRecord> execute_retrieval_in_place(SceneState& s,
                                                              int object_id,
                                                              const UnitDir& d) {
  if (!s.is_active(object_id))
    throw std::out_of_range("execute_retrieval: unknown or removed id " +
                            std::to_string(object_id));
  std::map<int, double> disp;
  detail::sweep_retrieval(s, object_id, d, disp);
  s.removed.insert(object_id);
  for (const auto& r : settle_in_place(s)) disp[r.object_id] += r.displacement;
  std::vector<MovementRecord> records;
  for (const auto& [id, dd] : disp)
    if (id != object_id && dd > 0.0) records.push_back({id, dd, 0.0});
  return records;
}

inline std::pair<SceneState, std::vector<MovementRecord>> execute_retrieval(
    const SceneState& s, int object_id, const UnitDir& d) {
  SceneState out = s;
  auto rec = execute_retrieval_in_place(out, object_id, d);
  return {std::move(out), std::move(rec)};
}

// Conservative screen: true when retrieving mover along d provably touches
// nothing, because the swept AABB of the whole exit path misses every other
// object's AABB.
inline bool sweep_provably_clear(const SceneState& s, int mover_id,
                                 const UnitDir& d) {
  Aabb others = s.active_aabb(mover_id);
  if (!others.valid()) return true;
  Aabb exit_box = others.inflated(s.params.contact_margin() + s.params.h);
  Aabb m = s.obj(mover_id).particles.aabb();
  double travel = exit_box.diagonal().norm() * 2.0 + 0.5;
  Aabb swept = m;
  swept.grow(m.shifted(d.vec() * travel));
  swept = swept.inflated(s.params.push_margin() + 1e-9);
  for (int o : s.active_ids())
    if (o != mover_id && swept.overlaps(s.obj(o).particles.aabb()))
      return false;
  return true;
}

// Sweep-phase-only query: which objects would be pushed (and how far) while
// retrieving mover_id along d, before any settling. When this is empty the
// post-retrieval scene equals the pure-removal scene, so the full movement
// answer reduces to the direction-independent removal settle.
inline std::map<int, double> oracle_sweep_pushes(const SceneState& s,
                                                 int mover_id,
                                                 const UnitDir& d) {
  if (!s.is_active(mover_id))
    throw std::out_of_range("oracle_sweep_pushes: unknown or removed id " +
                            std::to_string(mover_id));
  SceneState clone = s;
  std::map<int, double> disp;
  detail::sweep_retrieval(clone, mover_id, d, disp);
  return disp;
}

// Pure query: displacement magnitude of every other active object if mover_id
// were retrieved along d. Input scene is unmodified.
inline std::map<int, double> oracle_movement(const SceneState& s, int mover_id,
                                             const UnitDir& d) {
  SceneState clone = s;
  auto records = execute_retrieval_in_place(clone, mover_id, d);
  std::map<int, double> out;
  for (int id : s.active_ids())
    if (id != mover_id) out[id] = 0.0;
  for (const auto& r : records) out[r.object_id] = r.displacement;
  return out;
}

// Brute-force ground truth: edge i -> j iff deleting i in place (no sweep)
// displaces j by more than th_move after settling. Evaluation only.
inline SupportGraph oracle_support_graph(const SceneState& s) {
  SupportGraph g;
  for (int id : s.active_ids()) g.nodes.insert(id);
  for (int i : s.active_ids()) {
    SceneState clone = s;
    clone.removed.insert(i);
    for (const auto& r : settle_in_place(clone))
      if (r.displacement > s.params.th_move) g.edges.insert({i, r.object_id});
  }
  for (const auto& [a, b] : g.edges)
    if (a == b) throw std::runtime_error("oracle support graph: self-edge");
  if (!g.is_acyclic())
    throw std::runtime_error("mutual support detected in oracle graph");
  return g;
}

// ---------------------------------------------------------------------------
// Procedural clutter generation

struct GeneratorPreset {
  std::string name;
  double dim_min, dim_max;        // full x/y extents
  double height_min, height_max;  // full z extent
  double max_aspect = 3.0;
  int count_min = 8, count_max = 15;  // desk scale
  double stack_bias = 0.55;     // probability of stacking on an existing pile
  double occluder_bias = 0.6;   // probability of the hidden-on-base pattern
  double workspace_half = 0.32;
  std::vector<std::string> categories;

  static GeneratorPreset by_name(const std::string& n) {
    if (n == "kitchen")
      return {"kitchen", 0.05, 0.13, 0.04, 0.15, 3.0, 8, 15, 0.55, 0.6, 0.34,
              {"pot", "plate", "cup", "carton", "bowl"}};
    if (n == "desk")
      return {"desk", 0.04, 0.15, 0.015, 0.08, 3.5, 8, 15, 0.6, 0.75, 0.34,
              {"book", "box", "notepad", "case", "tray"}};
    if (n == "food")
      return {"food", 0.03, 0.09, 0.02, 0.10, 3.0, 8, 15, 0.6, 0.6, 0.28,
              {"can", "snack", "pack", "jar", "bar"}};
    if (n == "sundries")
      return {"sundries", 0.03, 0.14, 0.02, 0.12, 3.5, 8, 15, 0.55, 0.6, 0.34,
              {"bottle", "tin", "brush", "soap", "roll"}};
    throw std::invalid_argument("unknown preset: " + n);
  }

  int sample_object_count(Rng& rng) const {
    return count_min +
           static_cast<int>(rng.next_below(
               static_cast<std::uint64_t>(count_max - count_min + 1)));
  }
};

namespace detail {

struct Pile {
  std::vector<int> members;
  Aabb footprint;  // xy extent (z ignored)
  int top = -1;
  double top_z = 0.0;
};

inline Aabb yaw_footprint(const Vec3& he, const Pose& pose) {
  Aabb f;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      Vec3 c = rotate_z({sx * he.x, sy * he.y, 0.0}, pose.yaw) + pose.pos;
      f.grow(Vec3{c.x, c.y, -1.0});
      f.grow(Vec3{c.x, c.y, 1.0});
    }
  return f;
}

inline bool footprint_clear(const Aabb& fp, const std::vector<Pile>& piles,
                            double clearance, int skip = -1) {
  Aabb inflated = fp.inflated(clearance);
  for (std::size_t i = 0; i < piles.size(); ++i) {
    if (static_cast<int>(i) == skip) continue;
    if (inflated.overlaps(piles[i].footprint)) return false;
  }
  return true;
}

}  // namespace detail

// Deterministic procedural clutter: objects placed sequentially on the ground
// or on top of prior objects, each placement immediately stable. Pile
// footprints keep a clearance so vertical retrieval corridors stay disjoint
// across piles. With probability occluder_bias the first pile is a wide base
// carrying a tall front object and a small back object (camera convention:
// front = -y), which the camera then occludes.
inline SceneState generate_clutter(const GeneratorPreset& preset, int n_objects,
                                   std::uint64_t seed) {
  if (n_objects < 1) throw std::invalid_argument("generate_clutter: n_objects < 1");
  SceneState s;
  s.rng_seed = seed;
  s.preset_name = preset.name;
  Rng rng(hash_combine(seed, fnv1a(preset.name)));
  const SceneParams& pp = s.params;
  const double rest_gap = 1.2 * pp.h;
  const double clearance = 0.05;
  const double stab_margin = 0.018;
  const double max_pile_z = 0.42;

  std::vector<detail::Pile> piles;
  auto quantize = [](double v) { return std::round(v * 1e6) / 1e6; };

  auto add_object = [&](const Vec3& he, Pose pose, const std::string& cat,
                        int pile_idx) -> int {
    RigidObject o;
    o.id = static_cast<int>(s.objects.size());
    o.half_extents = {quantize(he.x), quantize(he.y), quantize(he.z)};
    pose.pos = {quantize(pose.pos.x), quantize(pose.pos.y), quantize(pose.pos.z)};
    pose.yaw = quantize(pose.yaw);
    o.pose = pose;
    o.category = cat;
    o.refresh_particles(pp.h);
    s.objects.push_back(std::move(o));
    const RigidObject& ref = s.objects.back();
    Aabb fp = detail::yaw_footprint(ref.half_extents, ref.pose);
    if (pile_idx < 0) {
      piles.push_back({{ref.id}, fp, ref.id,
                       ref.pose.pos.z + ref.half_extents.z});
      return static_cast<int>(piles.size()) - 1;
    }
    detail::Pile& pile = piles[pile_idx];
    pile.members.push_back(ref.id);
    pile.footprint.grow(fp);
    if (ref.pose.pos.z + ref.half_extents.z > pile.top_z) {
      pile.top = ref.id;
      pile.top_z = ref.pose.pos.z + ref.half_extents.z;
    }
    return pile_idx;
  };

  auto sample_dims = [&](double scale) {
    double x = rng.uniform(preset.dim_min, preset.dim_max) * scale;
    double lo = std::max(preset.dim_min * scale, x / preset.max_aspect);
    double hi = std::min(preset.dim_max * scale, x * preset.max_aspect);
    double y = rng.uniform(lo, hi);
    double z = rng.uniform(preset.height_min, preset.height_max);
    return Vec3{x / 2.0, y / 2.0, z / 2.0};
  };
  auto category = [&]() {
    return preset.categories[rng.next_below(preset.categories.size())];
  };

  auto place_on_ground = [&](const Vec3& he, double yaw) -> bool {
    for (int attempt = 0; attempt < 60; ++attempt) {
      double span = preset.workspace_half - std::max(he.x, he.y);
      Pose pose{yaw, {rng.uniform(-span, span), rng.uniform(-span, span),
                      he.z + pp.h}};
      Aabb fp = detail::yaw_footprint(he, pose);
      if (!detail::footprint_clear(fp, piles, clearance)) continue;
      add_object(he, pose, category(), -1);
      return true;
    }
    return false;
  };

  auto place_on_pile = [&](int pile_idx, const Vec3& he) -> bool {
    detail::Pile& pile = piles[pile_idx];
    const RigidObject& top = s.obj(pile.top);
    if (pile.top_z + 2.0 * he.z > max_pile_z) return false;
    double ox_max = top.half_extents.x - stab_margin;
    double oy_max = top.half_extents.y - stab_margin;
    if (ox_max < 0.0 || oy_max < 0.0) return false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Vec3 local{rng.uniform(-ox_max, ox_max), rng.uniform(-oy_max, oy_max), 0.0};
      Vec3 off = rotate_z(local, top.pose.yaw);
      Pose pose{top.pose.yaw,
                {top.pose.pos.x + off.x, top.pose.pos.y + off.y,
                 pile.top_z + rest_gap + he.z}};
      Aabb fp = detail::yaw_footprint(he, pose);
      if (!detail::footprint_clear(fp, piles, clearance, pile_idx)) continue;
      add_object(he, pose, category(), pile_idx);
      return true;
    }
    return false;
  };

  // Hidden-on-base pattern: wide base, tall object on its front (-y) half,
  // small object on its back (+y) half.
  int placed = 0;
  if (n_objects >= 3 && rng.chance(preset.occluder_bias)) {
    Vec3 base_he{preset.dim_max * 0.65, preset.dim_max * 0.95,
                 rng.uniform(preset.height_min, preset.height_max) / 2.0};
    double span = preset.workspace_half - std::max(base_he.x, base_he.y);
    Pose base_pose{0.0, {rng.uniform(-span * 0.7, span * 0.7),
                         rng.uniform(-span * 0.7, span * 0.7),
                         base_he.z + pp.h}};
    Aabb base_fp = detail::yaw_footprint(base_he, base_pose);
    if (detail::footprint_clear(base_fp, piles, clearance)) {
      int pile_idx = add_object(base_he, base_pose, category(), -1);
      double base_top = base_pose.pos.z + base_he.z;
      Vec3 occ_he{base_he.x * 0.8, base_he.y * 0.38,
                  std::max(preset.height_max * 0.75, 0.06)};
      Pose occ_pose{0.0, {base_pose.pos.x,
                          base_pose.pos.y - (base_he.y - occ_he.y - stab_margin),
                          base_top + rest_gap + occ_he.z}};
      add_object(occ_he, occ_pose, category(), pile_idx);
      Vec3 hid_he{base_he.x * 0.45, base_he.y * 0.3,
                  std::max(preset.height_min * 0.7, 0.012)};
      Pose hid_pose{0.0, {base_pose.pos.x,
                          base_pose.pos.y + (base_he.y - hid_he.y - stab_margin),
                          base_top + rest_gap + hid_he.z}};
      add_object(hid_he, hid_pose, category(), pile_idx);
      placed = 3;
    }
  }

  int overflow_guard = 0;
  while (placed < n_objects) {
    if (++overflow_guard > 40 * n_objects)
      throw std::runtime_error("generation overflow (seed " +
                               std::to_string(seed) + ")");
    Vec3 he = sample_dims(1.0);
    bool stacked = false;
    if (!piles.empty() && rng.chance(preset.stack_bias)) {
      int pile_idx = static_cast<int>(rng.next_below(piles.size()));
      // shrink to fit the pile top
      const RigidObject& top = s.obj(piles[pile_idx].top);
      double fit = 0.8 * std::min(top.half_extents.x / std::max(he.x, 1e-9),
                                  top.half_extents.y / std::max(he.y, 1e-9));
      if (fit < 1.0) {
        he.x *= fit;
        he.y *= fit;
      }
      if (he.x > 0.012 && he.y > 0.012)
        stacked = place_on_pile(pile_idx, he);
    }
    if (!stacked && !place_on_ground(he, rng.uniform(0.0, 3.141592653589793)))
      continue;
    ++placed;
  }

  // validation: generated scenes must already be at rest
  {
    SceneState probe = s;
    auto rec = settle_in_place(probe);
    double moved = 0.0;
    for (const auto& r : rec) moved += r.displacement;
    if (moved > 0.0)
      throw std::runtime_error("generation overflow (unstable placement, seed " +
                               std::to_string(seed) + ")");
  }

  // target: uniform among objects that support at least one other (pile
  // non-top members), falling back to any object
  std::vector<int> supporters;
  for (const auto& pile : piles) {
    std::map<int, double> tops;  // id -> top z
    for (int id : pile.members) {
      const RigidObject& o = s.obj(id);
      // supporter iff some later member rests directly on it
      for (int other : pile.members) {
        if (other == id) continue;
        const RigidObject& u = s.obj(other);
        double gap = (u.pose.pos.z - u.half_extents.z) -
                     (o.pose.pos.z + o.half_extents.z);
        if (gap > 0.0 && gap < pp.contact_margin()) {
          supporters.push_back(id);
          break;
        }
      }
    }
    (void)tops;
  }
  std::sort(supporters.begin(), supporters.end());
  supporters.erase(std::unique(supporters.begin(), supporters.end()),
                   supporters.end());
  if (!supporters.empty())
    s.target_id = supporters[rng.next_below(supporters.size())];
  else
    s.target_id = static_cast<int>(rng.next_below(s.objects.size()));
  return s;
}

}  // namespace clutter
