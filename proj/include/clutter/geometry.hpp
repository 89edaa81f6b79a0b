#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace clutter {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double dist2(const Vec3& a, const Vec3& b) { return (a - b).norm2(); }
inline double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct Vec2 {
  double x = 0.0, y = 0.0;
};

// Unit vector; construction normalizes and rejects near-zero input.
struct UnitDir {
  double x = 0.0, y = 0.0, z = 1.0;

  static UnitDir from(const Vec3& v) {
    double n = v.norm();
    if (!(n > 1e-12) || !v.finite())
      throw std::invalid_argument("UnitDir: zero or non-finite vector");
    return UnitDir{v.x / n, v.y / n, v.z / n};
  }
  static UnitDir of(double x, double y, double z) { return from(Vec3{x, y, z}); }
  static UnitDir plus_z() { return UnitDir{0.0, 0.0, 1.0}; }

  Vec3 vec() const { return {x, y, z}; }
  double dot(const UnitDir& o) const { return x * o.x + y * o.y + z * o.z; }
  double angle_to(const UnitDir& o) const {
    return std::acos(std::clamp(dot(o), -1.0, 1.0));
  }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void grow(const Vec3& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
  }
  void grow(const Aabb& b) {
    grow(b.lo);
    grow(b.hi);
  }
  bool valid() const { return lo.x <= hi.x; }
  Aabb inflated(double m) const {
    return {{lo.x - m, lo.y - m, lo.z - m}, {hi.x + m, hi.y + m, hi.z + m}};
  }
  Aabb shifted(const Vec3& t) const { return {lo + t, hi + t}; }
  bool overlaps(const Aabb& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y &&
           o.lo.y <= hi.y && lo.z <= o.hi.z && o.lo.z <= hi.z;
  }
  // lower bound on distance between any point of this and any point of o
  double distance_to(const Aabb& o) const {
    auto axis = [](double alo, double ahi, double blo, double bhi) {
      if (ahi < blo) return blo - ahi;
      if (bhi < alo) return alo - bhi;
      return 0.0;
    };
    double dx = axis(lo.x, hi.x, o.lo.x, o.hi.x);
    double dy = axis(lo.y, hi.y, o.lo.y, o.hi.y);
    double dz = axis(lo.z, hi.z, o.lo.z, o.hi.z);
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  Vec3 diagonal() const { return hi - lo; }
};

struct ParticleCloud {
  std::vector<Vec3> points;
  double spacing_h = 0.01;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }

  Aabb aabb() const {
    Aabb b;
    for (const auto& p : points) b.grow(p);
    return b;
  }
  Vec3 centroid() const {
    Vec3 c;
    for (const auto& p : points) c += p;
    double n = points.empty() ? 1.0 : static_cast<double>(points.size());
    return c * (1.0 / n);
  }
  double min_z() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::min(m, p.z);
    return m;
  }
  void translate(const Vec3& t) {
    for (auto& p : points) p += t;
  }
};

// Greedy max-min farthest-point sampling. Deterministic: starts at
// seed_index, ties broken by smallest index.
inline ParticleCloud farthest_point_sample(const ParticleCloud& cloud,
                                           std::size_t r,
                                           std::size_t seed_index = 0) {
  if (cloud.empty()) throw std::invalid_argument("empty input cloud");
  if (r < 1) throw std::invalid_argument("farthest_point_sample: r < 1");
  const std::size_t n = cloud.size();
  const std::size_t k = std::min(r, n);
  seed_index %= n;

  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::size_t cur = seed_index;
  for (std::size_t i = 0; i < k; ++i) {
    picked.push_back(cur);
    const Vec3& q = cloud.points[cur];
    std::size_t arg = 0;
    double far = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = std::min(best[j], dist2(cloud.points[j], q));
      best[j] = d;
      if (d > far) {
        far = d;
        arg = j;
      }
    }
    cur = arg;
  }
  ParticleCloud out;
  out.spacing_h = cloud.spacing_h;
  out.points.reserve(k);
  for (std::size_t idx : picked) out.points.push_back(cloud.points[idx]);
  return out;
}

// Exact minimum cross-pair distance, brute force. Desk-scale clouds only.
inline double min_pair_distance(const ParticleCloud& a, const ParticleCloud& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("min_pair_distance: empty cloud");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a.points)
    for (const auto& q : b.points) best = std::min(best, dist2(p, q));
  return std::sqrt(best);
}

// True iff the minimum cross-pair distance is < eps. AABB prescreen plus
// early exit; result identical to min_pair_distance(a,b) < eps.
inline bool clouds_within(const ParticleCloud& a, const ParticleCloud& b,
                          double eps, const Vec3& a_offset = {}) {
  if (a.empty() || b.empty()) return false;
  Aabb bb = b.aabb();
  if (a.aabb().shifted(a_offset).distance_to(bb) >= eps) return false;
  const double e2 = eps * eps;
  Aabb near_b = bb.inflated(eps);
  for (const auto& p0 : a.points) {
    Vec3 p = p0 + a_offset;
    if (p.x < near_b.lo.x || p.x > near_b.hi.x || p.y < near_b.lo.y ||
        p.y > near_b.hi.y || p.z < near_b.lo.z || p.z > near_b.hi.z)
      continue;
    for (const auto& q : b.points)
      if (dist2(p, q) < e2) return true;
  }
  return false;
}

// Translate mover along d in steps of step_delta (up to max_len); first travel
// distance where the clouds come within margin, or nullopt.
inline std::optional<double> sweep_contact(const ParticleCloud& mover,
                                           const ParticleCloud& obstacle,
                                           const UnitDir& d, double step_delta,
                                           double max_len, double margin) {
  if (step_delta <= 0.0) throw std::invalid_argument("sweep_contact: step_delta <= 0");
  if (max_len < 0.0 || margin < 0.0)
    throw std::invalid_argument("sweep_contact: negative max_len or margin");
  if (mover.empty() || obstacle.empty())
    throw std::invalid_argument("sweep_contact: empty cloud");

  // Restrict stepping to the travel interval where the inflated AABBs can
  // overlap along d; outside it the clouds are provably farther than margin.
  Aabb ma = mover.aabb();
  Aabb ob = obstacle.aabb().inflated(margin);
  Vec3 dv = d.vec();
  double t_enter = 0.0, t_exit = max_len;
  for (int axis = 0; axis < 3; ++axis) {
    double mlo = axis == 0 ? ma.lo.x : axis == 1 ? ma.lo.y : ma.lo.z;
    double mhi = axis == 0 ? ma.hi.x : axis == 1 ? ma.hi.y : ma.hi.z;
    double olo = axis == 0 ? ob.lo.x : axis == 1 ? ob.lo.y : ob.lo.z;
    double ohi = axis == 0 ? ob.hi.x : axis == 1 ? ob.hi.y : ob.hi.z;
    double v = axis == 0 ? dv.x : axis == 1 ? dv.y : dv.z;
    if (std::abs(v) < 1e-12) {
      if (mhi < olo || mlo > ohi) return std::nullopt;
    } else {
      double t0 = (olo - mhi) / v;
      double t1 = (ohi - mlo) / v;
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
    }
  }
  if (t_enter > t_exit) return std::nullopt;

  long first = static_cast<long>(std::max(0.0, std::floor(t_enter / step_delta)));
  long last = static_cast<long>(std::floor(std::min(max_len, t_exit) / step_delta));
  for (long i = first; i <= last; ++i) {
    double t = static_cast<double>(i) * step_delta;
    if (t > max_len) break;
    if (clouds_within(mover, obstacle, margin, dv * t)) return t;
  }
  return std::nullopt;
}

namespace detail {
inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain; returns CCW hull without the closing point.
inline std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double wx = p.x - a.x, wy = p.y - a.y;
  double c1 = vx * wx + vy * wy;
  double c2 = vx * vx + vy * vy;
  double t = c2 > 0.0 ? std::clamp(c1 / c2, 0.0, 1.0) : 0.0;
  double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}
}  // namespace detail

// Signed distance of p to the convex hull of pts: negative inside, positive
// outside. Degenerate hulls (point/segment) give distance to the carrier.
inline double support_polygon_signed_distance(const Vec2& p,
                                              const std::vector<Vec2>& pts) {
  if (pts.empty()) return std::numeric_limits<double>::infinity();
  std::vector<Vec2> hull = detail::convex_hull_2d(pts);
  if (hull.size() == 1) {
    double dx = p.x - hull[0].x, dy = p.y - hull[0].y;
    return std::sqrt(dx * dx + dy * dy);
  }
  if (hull.size() == 2)
    return detail::point_segment_dist(p, hull[0], hull[1]);
  bool inside = true;
  double boundary = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (detail::cross2(a, b, p) < 0.0) inside = false;
    boundary = std::min(boundary, detail::point_segment_dist(p, a, b));
  }
  return inside ? -boundary : boundary;
}

// Points within tol of the boundary count as inside.
inline bool support_polygon_contains(const Vec2& com_xy,
                                     const std::vector<Vec2>& contact_xy,
                                     double tol) {
  if (contact_xy.empty()) return false;
  return support_polygon_signed_distance(com_xy, contact_xy) <= tol;
}

// Uniform hash grid over points with integer payloads; used as broad phase by
// the simulator and predictor. Queries are exact (candidates re-checked).
class PointGrid {
 public:
  explicit PointGrid(double cell) : cell_(cell) {}

  void insert(const Vec3& p, int payload) {
    cells_[key(p)].push_back({p, payload});
  }

  template <typename F>
  void for_neighbors(const Vec3& p, double radius, F&& fn) const {
    const double r2 = radius * radius;
    int span = static_cast<int>(std::ceil(radius / cell_));
    long cx = coord(p.x), cy = coord(p.y), cz = coord(p.z);
    for (long dx = -span; dx <= span; ++dx)
      for (long dy = -span; dy <= span; ++dy)
        for (long dz = -span; dz <= span; ++dz) {
          auto it = cells_.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (const auto& e : it->second)
            if (dist2(e.first, p) <= r2) fn(e.first, e.second);
        }
  }

  bool empty() const { return cells_.empty(); }

 private:
  long coord(double v) const { return static_cast<long>(std::floor(v / cell_)); }
  static std::uint64_t pack(long x, long y, long z) {
    auto u = [](long v) {
      return static_cast<std::uint64_t>(v + (1l << 20)) & 0x1fffff;
    };
    return (u(x) << 42) | (u(y) << 21) | u(z);
  }
  std::uint64_t key(const Vec3& p) const {
    return pack(coord(p.x), coord(p.y), coord(p.z));
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<Vec3, int>>> cells_;
};

}  // namespace clutter
