// Delaunay triangulation of survey soundings (Bowyer-Watson over a ghost
// hull, sign-exact predicates, index-ordered symbolic perturbation for
// cocircular ties) with planar TIN interpolation and rasterization.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bathykit/calibrate.hpp"
#include "bathykit/detail/polygon.hpp"
#include "bathykit/detail/predicates.hpp"
#include "bathykit/grid.hpp"

namespace bathykit::tin {

using calibrate::SurveyPoint;

class TinError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class TooFewPoints : public TinError {
 public:
  TooFewPoints() : TinError("triangulation needs at least 3 distinct points") {}
};
class AllCollinear : public TinError {
 public:
  AllCollinear() : TinError("all points are collinear") {}
};

struct Triangulation {
  static constexpr std::uint32_t kNoNeighbor = 0xFFFFFFFFu;

  std::vector<SurveyPoint> vertices;  ///< deduplicated, input order preserved
  std::vector<std::array<std::uint32_t, 3>> triangles;  ///< CCW, sorted
  std::vector<std::array<std::uint32_t, 3>> neighbors;  ///< across edge opposite v[k]
  std::size_t duplicates_merged = 0;
};

namespace detail_tin {

using bathykit::detail::Pt;

inline constexpr std::uint32_t GHOST = 0xFFFFFFFFu;
inline constexpr double kMergeRadius = 1e-9;

struct BTri {
  std::array<std::uint32_t, 3> v{};
  std::array<std::uint32_t, 3> nbr{};
  bool alive = true;
  bool is_ghost() const { return v[2] == GHOST; }
};

inline std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline std::uint32_t interleave16(std::uint32_t v) {
  v &= 0xFFFFu;
  v = (v | (v << 8)) & 0x00FF00FFu;
  v = (v | (v << 4)) & 0x0F0F0F0Fu;
  v = (v | (v << 2)) & 0x33333333u;
  v = (v | (v << 1)) & 0x55555555u;
  return v;
}

/// Merges points closer than kMergeRadius (transitively), keeping the first
/// occurrence. Returns surviving points in input order.
inline std::vector<SurveyPoint> merge_duplicates(
    std::span<const SurveyPoint> pts, std::size_t& merged) {
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  const auto find = [&](std::uint32_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const auto unite = [&](std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;  // keep the earliest occurrence
  };

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (pts[a].x_m != pts[b].x_m) return pts[a].x_m < pts[b].x_m;
    if (pts[a].y_m != pts[b].y_m) return pts[a].y_m < pts[b].y_m;
    return a < b;
  });
  const double r2 = kMergeRadius * kMergeRadius;
  std::size_t window = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = order[k];
    while (window < k && pts[i].x_m - pts[order[window]].x_m > kMergeRadius)
      ++window;
    for (std::size_t j = window; j < k; ++j) {
      const auto o = order[j];
      const double dx = pts[i].x_m - pts[o].x_m;
      const double dy = pts[i].y_m - pts[o].y_m;
      if (dx * dx + dy * dy <= r2) unite(i, o);
    }
  }
  std::vector<SurveyPoint> kept;
  kept.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    if (find(i) == i) kept.push_back(pts[i]);
  merged = n - kept.size();
  return kept;
}

class Builder {
 public:
  explicit Builder(std::vector<SurveyPoint> vertices)
      : verts_(std::move(vertices)) {}

  Triangulation build() {
    const std::size_t n = verts_.size();
    if (n < 3) throw TooFewPoints();
    insertion_order();
    init_first_triangle();
    for (std::size_t k = 3; k < order_.size(); ++k) insert(order_[k]);
    return finalize();
  }

 private:
  Pt P(std::uint32_t i) const { return {verts_[i].x_m, verts_[i].y_m}; }

  // Space-filling (Morton) insertion order: locality keeps the walk short.
  void insertion_order() {
    double minx = verts_[0].x_m, maxx = minx, miny = verts_[0].y_m, maxy = miny;
    for (const auto& p : verts_) {
      minx = std::min(minx, p.x_m);
      maxx = std::max(maxx, p.x_m);
      miny = std::min(miny, p.y_m);
      maxy = std::max(maxy, p.y_m);
    }
    const double sx = maxx > minx ? 65535.0 / (maxx - minx) : 0.0;
    const double sy = maxy > miny ? 65535.0 / (maxy - miny) : 0.0;
    std::vector<std::uint64_t> code(verts_.size());
    for (std::size_t i = 0; i < verts_.size(); ++i) {
      const auto gx = static_cast<std::uint32_t>((verts_[i].x_m - minx) * sx);
      const auto gy = static_cast<std::uint32_t>((verts_[i].y_m - miny) * sy);
      code[i] = (static_cast<std::uint64_t>(interleave16(gy)) << 1) |
                interleave16(gx);
    }
    order_.resize(verts_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                return code[a] != code[b] ? code[a] < code[b] : a < b;
              });
  }

  void init_first_triangle() {
    // first pair plus the first point not collinear with it
    std::size_t k = 2;
    for (; k < order_.size(); ++k)
      if (bathykit::detail::orient2d_sign(P(order_[0]), P(order_[1]),
                                          P(order_[k])) != 0)
        break;
    if (k == order_.size()) throw AllCollinear();
    std::rotate(order_.begin() + 2, order_.begin() + k, order_.begin() + k + 1);

    std::uint32_t i0 = order_[0], i1 = order_[1], i2 = order_[2];
    if (bathykit::detail::orient2d_sign(P(i0), P(i1), P(i2)) < 0)
      std::swap(i1, i2);

    tris_.push_back({{i0, i1, i2}, {2, 3, 1}, true});       // 0: finite
    tris_.push_back({{i0, i1, GHOST}, {2, 3, 0}, true});    // 1: hull i0->i1
    tris_.push_back({{i1, i2, GHOST}, {3, 1, 0}, true});    // 2: hull i1->i2
    tris_.push_back({{i2, i0, GHOST}, {1, 2, 0}, true});    // 3: hull i2->i0
    last_finite_ = 0;
    visit_mark_.assign(4, 0);
    cavity_mark_.assign(4, 0);
  }

  bool conflicts(std::uint32_t t, const Pt& p, std::uint32_t ip) const {
    const BTri& tr = tris_[t];
    if (tr.is_ghost()) {
      const Pt a = P(tr.v[0]), b = P(tr.v[1]);
      const int o = bathykit::detail::orient2d_sign(a, b, p);
      if (o != 0) return o < 0;
      // collinear with the hull edge: in conflict only strictly between the
      // endpoints (beyond the span the neighbouring ghosts take over)
      const auto lex_less = [](const Pt& u, const Pt& v) {
        return u.x != v.x ? u.x < v.x : u.y < v.y;
      };
      const Pt lo = lex_less(a, b) ? a : b;
      const Pt hi = lex_less(a, b) ? b : a;
      return lex_less(lo, p) && lex_less(p, hi);
    }
    return bathykit::detail::incircle_sos(P(tr.v[0]), tr.v[0], P(tr.v[1]),
                                          tr.v[1], P(tr.v[2]), tr.v[2], p,
                                          ip) > 0;
  }

  std::uint32_t find_conflict_seed(const Pt& p) const {
    std::uint32_t cur = last_finite_;
    for (std::size_t guard = 0; guard < tris_.size() * 4 + 16; ++guard) {
      const BTri& t = tris_[cur];
      bool moved = false;
      for (int j = 0; j < 3; ++j) {
        const Pt a = P(t.v[j]);
        const Pt b = P(t.v[(j + 1) % 3]);
        if (bathykit::detail::orient2d_sign(a, b, p) < 0) {
          const std::uint32_t n = t.nbr[(j + 2) % 3];
          if (tris_[n].is_ghost()) return n;  // crossed the hull
          cur = n;
          moved = true;
          break;
        }
      }
      if (!moved) return cur;  // contains p (possibly on an edge)
    }
    throw TinError("point location walk failed to terminate");
  }

  void set_nbr(std::uint32_t t, std::uint32_t u, std::uint32_t v,
               std::uint32_t to) {
    BTri& tr = tris_[t];
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = tr.v[(k + 1) % 3];
      const std::uint32_t b = tr.v[(k + 2) % 3];
      if ((a == u && b == v) || (a == v && b == u)) {
        tr.nbr[k] = to;
        return;
      }
    }
    throw TinError("adjacency bookkeeping is inconsistent");
  }

  void insert(std::uint32_t ip) {
    const Pt p = P(ip);
    const std::uint32_t seed = find_conflict_seed(p);

    ++epoch_;
    cavity_.clear();
    stack_.clear();
    stack_.push_back(seed);
    visit_mark_[seed] = epoch_;
    if (!conflicts(seed, p, ip))
      throw TinError("conflict seed does not conflict");
    cavity_mark_[seed] = epoch_;
    cavity_.push_back(seed);
    while (!stack_.empty()) {
      const std::uint32_t t = stack_.back();
      stack_.pop_back();
      for (const std::uint32_t n : tris_[t].nbr) {
        if (visit_mark_[n] == epoch_) continue;
        visit_mark_[n] = epoch_;
        if (conflicts(n, p, ip)) {
          cavity_mark_[n] = epoch_;
          cavity_.push_back(n);
          stack_.push_back(n);
        }
      }
    }

    // cavity boundary, edges directed as they appear in the dying triangles
    boundary_.clear();
    for (const std::uint32_t t : cavity_) {
      const BTri& tr = tris_[t];
      for (int k = 0; k < 3; ++k) {
        const std::uint32_t n = tr.nbr[k];
        if (cavity_mark_[n] == epoch_) continue;
        boundary_.push_back(
            {tr.v[(k + 1) % 3], tr.v[(k + 2) % 3], n});
      }
    }
    for (const std::uint32_t t : cavity_) tris_[t].alive = false;

    edge_links_.clear();
    std::uint32_t first_new_finite = GHOST;
    for (const auto& e : boundary_) {
      BTri nt;
      if (e.u == GHOST)
        nt.v = {e.v, ip, GHOST};
      else if (e.v == GHOST)
        nt.v = {ip, e.u, GHOST};
      else
        nt.v = {e.u, e.v, ip};
      nt.nbr = {GHOST, GHOST, GHOST};
      const auto id = static_cast<std::uint32_t>(tris_.size());
      tris_.push_back(nt);
      visit_mark_.push_back(0);
      cavity_mark_.push_back(0);
      if (!nt.is_ghost() && first_new_finite == GHOST) first_new_finite = id;

      set_nbr(id, e.u, e.v, e.outside);
      set_nbr(e.outside, e.u, e.v, id);
      // stitch the two p-edges to sibling new triangles as they appear
      for (int k = 0; k < 3; ++k) {
        const std::uint32_t a = tris_[id].v[(k + 1) % 3];
        const std::uint32_t b = tris_[id].v[(k + 2) % 3];
        if ((a == e.u && b == e.v) || (a == e.v && b == e.u)) continue;
        const auto key = edge_key(a, b);
        auto it = edge_links_.find(key);
        if (it == edge_links_.end()) {
          edge_links_.emplace(key, id);
        } else {
          set_nbr(id, a, b, it->second);
          set_nbr(it->second, a, b, id);
        }
      }
    }
    if (first_new_finite == GHOST)
      throw TinError("insertion produced no finite triangle");
    last_finite_ = first_new_finite;
  }

  Triangulation finalize() {
    Triangulation out;
    out.vertices = std::move(verts_);
    for (const BTri& t : tris_) {
      if (!t.alive || t.is_ghost()) continue;
      std::array<std::uint32_t, 3> v = t.v;
      while (!(v[0] < v[1] && v[0] < v[2]))  // rotate smallest index first
        v = {v[1], v[2], v[0]};
      out.triangles.push_back(v);
    }
    std::sort(out.triangles.begin(), out.triangles.end());

    out.neighbors.assign(out.triangles.size(),
                         {Triangulation::kNoNeighbor, Triangulation::kNoNeighbor,
                          Triangulation::kNoNeighbor});
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, int>> half;
    half.reserve(out.triangles.size() * 3);
    for (std::uint32_t t = 0; t < out.triangles.size(); ++t) {
      const auto& v = out.triangles[t];
      for (int k = 0; k < 3; ++k) {
        const auto key = edge_key(v[(k + 1) % 3], v[(k + 2) % 3]);
        auto it = half.find(key);
        if (it == half.end()) {
          half.emplace(key, std::make_pair(t, k));
        } else {
          out.neighbors[t][k] = it->second.first;
          out.neighbors[it->second.first][it->second.second] = t;
          half.erase(it);
        }
      }
    }
    return out;
  }

  std::vector<SurveyPoint> verts_;
  std::vector<std::uint32_t> order_;
  std::vector<BTri> tris_;
  std::vector<std::uint32_t> cavity_, stack_;
  std::vector<std::uint32_t> visit_mark_, cavity_mark_;
  struct BoundaryEdge {
    std::uint32_t u, v, outside;
  };
  std::vector<BoundaryEdge> boundary_;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_links_;
  std::uint32_t last_finite_ = 0;
  std::uint32_t epoch_ = 0;
};

}  // namespace detail_tin

/// Delaunay triangulation of the convex hull of `points`. Deterministic:
/// near-duplicate points (within 1e-9 m) are merged keeping the first
/// occurrence, and exactly cocircular quads resolve their diagonal to the
/// lowest vertex indices.
inline Triangulation delaunay(std::span<const SurveyPoint> points) {
  std::size_t merged = 0;
  auto kept = detail_tin::merge_duplicates(points, merged);
  detail_tin::Builder builder(std::move(kept));
  Triangulation t = builder.build();
  t.duplicates_merged = merged;
  return t;
}

inline Triangulation delaunay(const std::vector<SurveyPoint>& points) {
  return delaunay(std::span<const SurveyPoint>(points));
}

namespace detail_tin {

inline bool triangle_contains(const Triangulation& t, std::uint32_t tri,
                              const Pt& q) {
  const auto& v = t.triangles[tri];
  for (int j = 0; j < 3; ++j) {
    const auto& a = t.vertices[v[j]];
    const auto& b = t.vertices[v[(j + 1) % 3]];
    if (bathykit::detail::orient2d_sign({a.x_m, a.y_m}, {b.x_m, b.y_m}, q) < 0)
      return false;
  }
  return true;
}

}  // namespace detail_tin

/// Triangle containing q (hull-boundary inclusive; ties on shared edges or
/// vertices resolve to the lowest triangle index), or nullopt outside the
/// hull. `hint` seeds the walk and does not affect the result.
inline std::optional<std::uint32_t> locate(const Triangulation& t,
                                           PlanarPoint q_in,
                                           std::uint32_t hint = 0) {
  if (t.triangles.empty()) return std::nullopt;
  const detail_tin::Pt q{q_in.x_m, q_in.y_m};
  std::uint32_t cur = hint < t.triangles.size() ? hint : 0;
  for (std::size_t guard = 0; guard < t.triangles.size() * 4 + 16; ++guard) {
    const auto& v = t.triangles[cur];
    bool moved = false;
    bool on_edge = false;
    for (int j = 0; j < 3; ++j) {
      const auto& a = t.vertices[v[j]];
      const auto& b = t.vertices[v[(j + 1) % 3]];
      const int o = bathykit::detail::orient2d_sign({a.x_m, a.y_m},
                                                    {b.x_m, b.y_m}, q);
      if (o < 0) {
        const std::uint32_t n = t.neighbors[cur][(j + 2) % 3];
        if (n == Triangulation::kNoNeighbor) return std::nullopt;
        cur = n;
        moved = true;
        break;
      }
      if (o == 0) on_edge = true;
    }
    if (moved) continue;
    if (!on_edge) return cur;
    // boundary tie: lowest-indexed containing triangle wins
    for (std::uint32_t i = 0; i < cur; ++i)
      if (detail_tin::triangle_contains(t, i, q)) return i;
    return cur;
  }
  throw TinError("point location walk failed to terminate");
}

/// Planar (barycentric) interpolation over the containing triangle;
/// nullopt outside the hull. Returns the stored depth exactly at vertices.
inline std::optional<double> interpolate(const Triangulation& t,
                                         PlanarPoint q,
                                         std::uint32_t hint = 0) {
  const auto tri = locate(t, q, hint);
  if (!tri) return std::nullopt;
  const auto& v = t.triangles[*tri];
  const SurveyPoint& a = t.vertices[v[0]];
  const SurveyPoint& b = t.vertices[v[1]];
  const SurveyPoint& c = t.vertices[v[2]];
  for (const SurveyPoint* s : {&a, &b, &c})
    if (s->x_m == q.x_m && s->y_m == q.y_m) return s->depth_m;
  const double denom = bathykit::detail::cross(b.x_m - a.x_m, b.y_m - a.y_m,
                                               c.x_m - a.x_m, c.y_m - a.y_m);
  const double wa = bathykit::detail::cross(b.x_m - q.x_m, b.y_m - q.y_m,
                                            c.x_m - q.x_m, c.y_m - q.y_m) /
                    denom;
  const double wb = bathykit::detail::cross(c.x_m - q.x_m, c.y_m - q.y_m,
                                            a.x_m - q.x_m, a.y_m - q.y_m) /
                    denom;
  const double wc = 1.0 - wa - wb;
  return wa * a.depth_m + wb * b.depth_m + wc * c.depth_m;
}

inline constexpr std::size_t kMaxGridCells = 100'000'000;

/// Rasterizes the TIN onto cell centres covering the hull's bounding box.
/// Cells outside the hull, or outside `boundary` when given, are masked.
inline DepthGrid rasterize(const Triangulation& t,
                           std::span<const PlanarPoint> boundary,
                           double cell_m) {
  if (cell_m <= 0.0) throw GridError("cell size must be positive");
  if (t.vertices.empty()) throw GridError("empty triangulation");
  double minx = t.vertices[0].x_m, maxx = minx;
  double miny = t.vertices[0].y_m, maxy = miny;
  for (const auto& v : t.vertices) {
    minx = std::min(minx, v.x_m);
    maxx = std::max(maxx, v.x_m);
    miny = std::min(miny, v.y_m);
    maxy = std::max(maxy, v.y_m);
  }
  const auto cells = [&](double extent) {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(extent / cell_m - 1e-12)));
  };
  DepthGrid g;
  g.cell_m = cell_m;
  g.width = cells(maxx - minx);
  g.height = cells(maxy - miny);
  if (g.width > kMaxGridCells / std::max<std::size_t>(1, g.height))
    throw GridError("grid would exceed the 1e8 cell guard");
  g.origin = {minx + cell_m / 2.0, miny + cell_m / 2.0};
  g.depths.assign(g.width * g.height,
                  std::numeric_limits<double>::quiet_NaN());
  g.mask.assign(g.width * g.height, 0);

  std::uint32_t hint = 0;
  for (std::size_t iy = 0; iy < g.height; ++iy) {
    for (std::size_t ix = 0; ix < g.width; ++ix) {
      const PlanarPoint q = g.cell_center(ix, iy);
      const auto tri = locate(t, q, hint);
      if (!tri) continue;
      hint = *tri;
      if (!boundary.empty() && !bathykit::detail::point_in_polygon(q, boundary))
        continue;
      const auto d = interpolate(t, q, hint);
      if (!d) continue;
      g.depths[g.idx(ix, iy)] = *d;
      g.mask[g.idx(ix, iy)] = 1;
    }
  }
  return g;
}

inline DepthGrid rasterize(const Triangulation& t, double cell_m) {
  return rasterize(t, std::span<const PlanarPoint>{}, cell_m);
}

}  // namespace bathykit::tin
