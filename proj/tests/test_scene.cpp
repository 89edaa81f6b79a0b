#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "clutter/fixtures.hpp"
#include "clutter/io.hpp"
#include "clutter/scene.hpp"

using namespace clutter;

TEST_CASE("box surface clouds are deterministic and respect spacing") {
  Vec3 he{0.04, 0.03, 0.05};
  ParticleCloud a = box_surface_cloud(he, 0.01);
  ParticleCloud b = box_surface_cloud(he, 0.01);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(dist(a.points[i], b.points[i]) == 0.0);
  // all points on the surface, within the half extents
  for (const auto& p : a.points) {
    REQUIRE(std::abs(p.x) <= he.x + 1e-12);
    REQUIRE(std::abs(p.y) <= he.y + 1e-12);
    REQUIRE(std::abs(p.z) <= he.z + 1e-12);
    bool on_face = std::abs(std::abs(p.x) - he.x) < 1e-12 ||
                   std::abs(std::abs(p.y) - he.y) < 1e-12 ||
                   std::abs(std::abs(p.z) - he.z) < 1e-12;
    REQUIRE(on_face);
  }
  REQUIRE_THROWS_AS(box_surface_cloud({0.0, 0.1, 0.1}, 0.01),
                    std::invalid_argument);
}

TEST_CASE("settling an already settled scene moves nothing") {
  SceneState s = fixtures::make_tower(3);
  auto rec = settle_in_place(s);
  REQUIRE(rec.empty());
  SceneState g = generate_clutter(GeneratorPreset::by_name("desk"), 10, 21);
  REQUIRE(settle_in_place(g).empty());
}

TEST_CASE("removing the base of a tower makes upper boxes fall") {
  SceneState s = fixtures::make_tower(3);
  double z1 = s.obj(1).com.z;
  s.removed.insert(0);
  auto rec = settle_in_place(s);
  std::map<int, double> disp;
  for (const auto& r : rec) disp[r.object_id] = r.displacement;
  REQUIRE(disp.count(1) == 1);
  REQUIRE(disp.count(2) == 1);
  REQUIRE(disp[1] > s.params.th_move);
  REQUIRE(s.obj(1).com.z < z1);
  // rests near the ground afterwards
  REQUIRE(s.obj(1).particles.min_z() < 2.0 * s.params.h);
}

TEST_CASE("retrieval lifts the mover out and records only other objects") {
  SceneState s = fixtures::make_tower(2);
  auto [after, rec] = execute_retrieval(s, 1, UnitDir::plus_z());
  REQUIRE(after.removed.count(1) == 1);
  for (const auto& r : rec) REQUIRE(r.object_id != 1);
  // lifting the top box off a settled two-stack disturbs nothing
  for (const auto& r : rec) REQUIRE(r.displacement <= s.params.th_move);
  REQUIRE_THROWS_AS(execute_retrieval(after, 1, UnitDir::plus_z()),
                    std::out_of_range);
}

TEST_CASE("oracle_movement is a pure query") {
  SceneState s = fixtures::make_tower(3);
  std::uint64_t before = scene_digest(s);
  auto m = oracle_movement(s, 0, UnitDir::plus_z());
  REQUIRE(scene_digest(s) == before);
  REQUIRE(m.count(1) == 1);
  REQUIRE(m.count(2) == 1);
  REQUIRE(m.count(0) == 0);
  REQUIRE(m.at(1) > s.params.th_move);
}

TEST_CASE("oracle support graph of a tower is the expected chain") {
  SceneState s = fixtures::make_tower(3);
  SupportGraph g = oracle_support_graph(s);
  REQUIRE(g.nodes == std::set<int>{0, 1, 2});
  REQUIRE(g.has_edge(0, 1));
  REQUIRE(g.has_edge(0, 2));
  REQUIRE(g.has_edge(1, 2));
  REQUIRE_FALSE(g.has_edge(2, 1));
  REQUIRE(g.is_acyclic());
  REQUIRE(g.reachable_from(0) == std::set<int>{1, 2});
}

TEST_CASE("sweep_provably_clear screens swept paths conservatively") {
  SceneState s = fixtures::make_tower(2);
  // the top box exits upward untouched; the bottom box cannot
  REQUIRE(sweep_provably_clear(s, 1, UnitDir::plus_z()));
  REQUIRE_FALSE(sweep_provably_clear(s, 0, UnitDir::plus_z()));
  // clear directions really do move nothing
  auto m = oracle_movement(s, 1, UnitDir::plus_z());
  for (const auto& [id, d] : m) REQUIRE(d <= s.params.th_move);
}

TEST_CASE("sweep-only pushes match the full retrieval for pushing directions") {
  SceneState s = fixtures::make_side_by_side(0.005);
  // dragging one box sideways through its neighbor pushes it
  UnitDir d = UnitDir::of(1, 0, 0.3);
  auto pushes = oracle_sweep_pushes(s, 0, d);
  bool any = false;
  for (const auto& [id, dd] : pushes) any = any || dd > s.params.th_move;
  if (any) {
    auto full = oracle_movement(s, 0, d);
    for (const auto& [id, dd] : pushes)
      REQUIRE(full.at(id) >= dd - 1e-9);
  }
  // lifting straight up pushes nothing
  REQUIRE(oracle_sweep_pushes(s, 0, UnitDir::plus_z()).empty());
}

TEST_CASE("generator is deterministic and produces settled desk-scale scenes") {
  GeneratorPreset p = GeneratorPreset::by_name("kitchen");
  SceneState a = generate_clutter(p, 12, 77);
  SceneState b = generate_clutter(p, 12, 77);
  REQUIRE(scene_to_string(a) == scene_to_string(b));
  REQUIRE(scene_digest(a) == scene_digest(b));
  SceneState c = generate_clutter(p, 12, 78);
  REQUIRE(scene_to_string(a) != scene_to_string(c));

  REQUIRE(static_cast<int>(a.objects.size()) == 12);
  REQUIRE(a.is_active(a.target_id));
  REQUIRE(settle_in_place(a).empty());
  SupportGraph g = oracle_support_graph(a);
  REQUIRE(g.is_acyclic());
}

TEST_CASE("preset lookup and count sampling") {
  for (const char* n : {"kitchen", "desk", "food", "sundries"}) {
    GeneratorPreset p = GeneratorPreset::by_name(n);
    REQUIRE(p.name == n);
    REQUIRE(p.count_min == 8);
    REQUIRE(p.count_max == 15);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
      int c = p.sample_object_count(rng);
      REQUIRE(c >= p.count_min);
      REQUIRE(c <= p.count_max);
    }
  }
  REQUIRE_THROWS_AS(GeneratorPreset::by_name("attic"), std::invalid_argument);
  REQUIRE_THROWS_AS(
      generate_clutter(GeneratorPreset::by_name("desk"), 0, 1),
      std::invalid_argument);
}

TEST_CASE("fixtures are settled and expose their advertised structure") {
  for (const auto& name : fixtures::names()) {
    SceneState s = fixtures::by_name(name, 3);
    INFO(name);
    REQUIRE(s.is_active(s.target_id));
    REQUIRE(settle_in_place(s).empty());
    REQUIRE(oracle_support_graph(s).is_acyclic());
  }
  REQUIRE_THROWS_AS(fixtures::by_name("nope", 0), std::invalid_argument);
}
