#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "clutter/geometry.hpp"
#include "clutter/rng.hpp"

using namespace clutter;

namespace {

ParticleCloud random_cloud(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  ParticleCloud c;
  c.spacing_h = 0.01;
  for (std::size_t i = 0; i < n; ++i)
    c.points.push_back({rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                        rng.uniform(0.0, 0.4)});
  return c;
}

// Brute-force check of the greedy max-min invariant: every prefix of the
// sample maximizes the min-distance-to-prefix over all remaining points.
double min_dist_to(const std::vector<Vec3>& chosen, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : chosen) best = std::min(best, dist(q, p));
  return best;
}

}  // namespace

TEST_CASE("farthest point sampling satisfies the greedy max-min invariant") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng szr(hash_combine(seed, 99));
    std::size_t n = 3 + szr.next_below(510);  // up to 512
    ParticleCloud c = random_cloud(seed, n);
    std::size_t r = 1 + szr.next_below(n);
    ParticleCloud s = farthest_point_sample(c, r);
    REQUIRE(s.size() == std::min(r, n));

    std::vector<Vec3> prefix{s.points[0]};
    for (std::size_t i = 1; i < s.size(); ++i) {
      double chosen_d = min_dist_to(prefix, s.points[i]);
      for (const auto& p : c.points) {
        REQUIRE(min_dist_to(prefix, p) <= chosen_d + 1e-12);
      }
      prefix.push_back(s.points[i]);
    }
  }
}

TEST_CASE("farthest point sampling saturates when r exceeds the cloud") {
  ParticleCloud c = random_cloud(5, 100);
  ParticleCloud s = farthest_point_sample(c, 256);
  REQUIRE(s.size() == 100);
  // every input point appears exactly once
  std::set<std::tuple<double, double, double>> got;
  for (const auto& p : s.points) got.insert({p.x, p.y, p.z});
  REQUIRE(got.size() == 100);
}

TEST_CASE("farthest point sampling is deterministic and rejects empty input") {
  ParticleCloud c = random_cloud(9, 200);
  ParticleCloud a = farthest_point_sample(c, 64);
  ParticleCloud b = farthest_point_sample(c, 64);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    REQUIRE(dist(a.points[i], b.points[i]) == 0.0);
  ParticleCloud empty;
  REQUIRE_THROWS_WITH(farthest_point_sample(empty, 8), "empty input cloud");
  REQUIRE_THROWS_AS(farthest_point_sample(c, 0), std::invalid_argument);
}

TEST_CASE("min_pair_distance and clouds_within agree") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ParticleCloud a = random_cloud(seed, 40);
    ParticleCloud b = random_cloud(seed + 1000, 40);
    double d = min_pair_distance(a, b);
    REQUIRE(clouds_within(a, b, d + 1e-9));
    REQUIRE_FALSE(clouds_within(a, b, d - 1e-9));
  }
}

TEST_CASE("sweep_contact finds the first contact distance") {
  // unit-spaced point rows: mover at origin, obstacle 0.2 away along +x
  ParticleCloud mover, obstacle;
  mover.points.push_back({0, 0, 0});
  obstacle.points.push_back({0.2, 0, 0});
  auto hit = sweep_contact(mover, obstacle, UnitDir::of(1, 0, 0), 0.005, 1.0,
                           0.015);
  REQUIRE(hit.has_value());
  // contact when remaining gap < margin: first multiple of 0.005 above
  // 0.2 - 0.015 = 0.185
  REQUIRE(*hit == Catch::Approx(0.19).margin(1e-12));

  auto miss = sweep_contact(mover, obstacle, UnitDir::of(-1, 0, 0), 0.005, 1.0,
                            0.015);
  REQUIRE_FALSE(miss.has_value());
  auto up = sweep_contact(mover, obstacle, UnitDir::plus_z(), 0.005, 1.0, 0.015);
  REQUIRE_FALSE(up.has_value());
}

TEST_CASE("sweep_contact respects max_len and validates arguments") {
  ParticleCloud mover, obstacle;
  mover.points.push_back({0, 0, 0});
  obstacle.points.push_back({2.0, 0, 0});
  REQUIRE_FALSE(sweep_contact(mover, obstacle, UnitDir::of(1, 0, 0), 0.005, 1.0,
                              0.015)
                    .has_value());
  REQUIRE_THROWS_AS(
      sweep_contact(mover, obstacle, UnitDir::of(1, 0, 0), 0.0, 1.0, 0.015),
      std::invalid_argument);
  ParticleCloud empty;
  REQUIRE_THROWS_AS(
      sweep_contact(empty, obstacle, UnitDir::of(1, 0, 0), 0.005, 1.0, 0.015),
      std::invalid_argument);
}

TEST_CASE("convex hull and support polygon distances") {
  std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  auto hull = detail::convex_hull_2d(square);
  REQUIRE(hull.size() == 4);

  REQUIRE(support_polygon_signed_distance({0.5, 0.5}, square) ==
          Catch::Approx(-0.5));
  REQUIRE(support_polygon_signed_distance({2.0, 0.5}, square) ==
          Catch::Approx(1.0));
  REQUIRE(support_polygon_contains({0.5, 0.5}, square, 0.0));
  REQUIRE(support_polygon_contains({1.005, 0.5}, square, 0.01));
  REQUIRE_FALSE(support_polygon_contains({1.05, 0.5}, square, 0.01));
  // degenerate hulls
  std::vector<Vec2> seg{{0, 0}, {1, 0}};
  REQUIRE(support_polygon_signed_distance({0.5, 0.3}, seg) ==
          Catch::Approx(0.3));
  REQUIRE_FALSE(support_polygon_contains({0, 0}, {}, 1.0));
}

TEST_CASE("PointGrid neighbor queries are exact") {
  ParticleCloud c = random_cloud(3, 300);
  PointGrid grid(0.02);
  for (int i = 0; i < static_cast<int>(c.points.size()); ++i)
    grid.insert(c.points[i], i);
  Vec3 probe{0.05, -0.02, 0.2};
  double radius = 0.07;
  std::set<int> got;
  grid.for_neighbors(probe, radius, [&](const Vec3&, int id) { got.insert(id); });
  std::set<int> want;
  for (int i = 0; i < static_cast<int>(c.points.size()); ++i)
    if (dist(c.points[i], probe) <= radius) want.insert(i);
  REQUIRE(got == want);
}

TEST_CASE("UnitDir construction and Aabb basics") {
  REQUIRE_THROWS_AS(UnitDir::of(0, 0, 0), std::invalid_argument);
  UnitDir d = UnitDir::of(3, 0, 4);
  REQUIRE(d.x == Catch::Approx(0.6));
  REQUIRE(d.z == Catch::Approx(0.8));
  REQUIRE(UnitDir::plus_z().angle_to(UnitDir::of(0, 1, 0)) ==
          Catch::Approx(3.141592653589793 / 2));

  Aabb a;
  REQUIRE_FALSE(a.valid());
  a.grow(Vec3{0, 0, 0});
  a.grow(Vec3{1, 1, 1});
  REQUIRE(a.valid());
  Aabb b = a.shifted({3, 0, 0});
  REQUIRE_FALSE(a.overlaps(b));
  REQUIRE(a.distance_to(b) == Catch::Approx(2.0));
  REQUIRE(a.inflated(2.0).overlaps(b));
}
