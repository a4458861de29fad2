#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relnet/drawing.hpp"
#include "relnet/rng.hpp"
#include "relnet/types.hpp"

namespace relnet {

struct Circle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

/// Circumcircle of a non-degenerate triangle; nullopt when collinear.
inline std::optional<Circle> circumcircle(const Eigen::Vector2d& a,
                                          const Eigen::Vector2d& b,
                                          const Eigen::Vector2d& c) {
  Eigen::Vector2d ab = b - a, ac = c - a;
  double det = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  double scale = std::max({ab.norm(), ac.norm(), 1e-300});
  if (std::abs(det) < 1e-14 * scale * scale) return std::nullopt;
  double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
  Circle out;
  out.center = a + Eigen::Vector2d(ac.y() * ab2 - ab.y() * ac2,
                                    ab.x() * ac2 - ac.x() * ab2) / det;
  out.radius = (out.center - a).norm();
  return out;
}

struct DelaunayTriangle {
  int a = 0, b = 0, c = 0;  // point indices, counterclockwise
};

namespace detail {

struct TriState {
  int a, b, c;
  Eigen::Vector2d cc;  // circumcenter of the jittered points
  double rr;           // squared circumradius
  bool alive = true;
};

inline double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

}  // namespace detail

/// Delaunay triangulation via Bowyer-Watson. A deterministic sub-nanometre
/// jitter (relative to the point spread) breaks cocircular degeneracies such
/// as lattice cells; any triangulation of a cocircular set shares its
/// circumcenters, so downstream empty-circle candidates are unaffected.
inline std::vector<DelaunayTriangle> delaunay_triangulate(const Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  std::vector<DelaunayTriangle> out;
  if (n < 3) return out;

  Eigen::Vector2d lo = pts.colwise().minCoeff().transpose();
  Eigen::Vector2d hi = pts.colwise().maxCoeff().transpose();
  double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1.0});
  std::vector<Eigen::Vector2d> p(n + 3);
  for (int i = 0; i < n; ++i) {
    double jx = (static_cast<double>(mix64(derive_seed(0x9e11, i, 0)) >> 11) /
                     9007199254740992.0 - 0.5);
    double jy = (static_cast<double>(mix64(derive_seed(0x9e11, i, 1)) >> 11) /
                     9007199254740992.0 - 0.5);
    p[i] = pts.row(i).transpose() + 1e-9 * span * Eigen::Vector2d(jx, jy);
  }
  Eigen::Vector2d mid = 0.5 * (lo + hi);
  p[n] = mid + Eigen::Vector2d(-40.0 * span, -20.0 * span);
  p[n + 1] = mid + Eigen::Vector2d(40.0 * span, -20.0 * span);
  p[n + 2] = mid + Eigen::Vector2d(0.0, 40.0 * span);

  auto make_tri = [&](int a, int b, int c) {
    if (detail::orient(p[a], p[b], p[c]) < 0) std::swap(b, c);
    detail::TriState t{a, b, c, Eigen::Vector2d::Zero(), 0.0, true};
    auto cc = circumcircle(p[a], p[b], p[c]);
    if (cc) {
      t.cc = cc->center;
      t.rr = cc->radius * cc->radius;
    } else {
      t.rr = -1.0;  // degenerate: never claims points
    }
    return t;
  };

  std::vector<detail::TriState> tris;
  tris.push_back(make_tri(n, n + 1, n + 2));

  std::vector<int> bad;
  std::map<std::pair<int, int>, int> boundary;  // directed edge -> count
  for (int i = 0; i < n; ++i) {
    bad.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive || tris[t].rr < 0) continue;
      if ((p[i] - tris[t].cc).squaredNorm() <= tris[t].rr) bad.push_back(t);
    }
    boundary.clear();
    auto toggle = [&](int a, int b) {
      auto key = std::minmax(a, b);
      boundary[{key.first, key.second}] ^= 1;
    };
    for (int t : bad) {
      toggle(tris[t].a, tris[t].b);
      toggle(tris[t].b, tris[t].c);
      toggle(tris[t].c, tris[t].a);
      tris[t].alive = false;
    }
    for (const auto& [e, odd] : boundary)
      if (odd) tris.push_back(make_tri(e.first, e.second, i));
  }

  for (const auto& t : tris) {
    if (!t.alive) continue;
    if (t.a >= n || t.b >= n || t.c >= n) continue;
    out.push_back({t.a, t.b, t.c});
  }
  return out;
}

namespace detail {

/// Intersections of the perpendicular bisector of (a, b) with the sides of
/// an axis-aligned box.
inline void bisector_box_hits(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                              const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
                              std::vector<Eigen::Vector2d>& out) {
  Eigen::Vector2d m = 0.5 * (a + b);
  Eigen::Vector2d dir(-(b - a).y(), (b - a).x());
  double nrm = dir.norm();
  if (nrm == 0.0) return;
  dir /= nrm;
  auto emit = [&](double t) {
    Eigen::Vector2d q = m + t * dir;
    const double eps = 1e-9 * std::max({1.0, hi.x() - lo.x(), hi.y() - lo.y()});
    if (q.x() >= lo.x() - eps && q.x() <= hi.x() + eps && q.y() >= lo.y() - eps &&
        q.y() <= hi.y() + eps) {
      out.push_back({std::clamp(q.x(), lo.x(), hi.x()), std::clamp(q.y(), lo.y(), hi.y())});
    }
  };
  if (dir.x() != 0.0) {
    emit((lo.x() - m.x()) / dir.x());
    emit((hi.x() - m.x()) / dir.x());
  }
  if (dir.y() != 0.0) {
    emit((lo.y() - m.y()) / dir.y());
    emit((hi.y() - m.y()) / dir.y());
  }
}

}  // namespace detail

/// Largest circle empty of the given points whose center lies inside the
/// region. Exact in the plane: the optimum center is a Voronoi vertex, a
/// region corner, or a boundary point equidistant from a Delaunay-adjacent
/// pair, and all such candidates are enumerated and evaluated exactly on
/// the original coordinates.
inline Circle largest_empty_circle(const Eigen::MatrixXd& pts, const Box& region) {
  if (pts.rows() == 0)
    throw precondition_error("largest_empty_circle: no points");
  if (region.dim() != 2 || pts.cols() != 2)
    throw precondition_error("largest_empty_circle: two dimensions required");
  const Eigen::Vector2d lo = region.lo, hi = region.hi;
  const double eps = 1e-9 * std::max({1.0, hi.x() - lo.x(), hi.y() - lo.y()});

  std::vector<Eigen::Vector2d> cand;
  cand.push_back({lo.x(), lo.y()});
  cand.push_back({lo.x(), hi.y()});
  cand.push_back({hi.x(), lo.y()});
  cand.push_back({hi.x(), hi.y()});

  auto add_inside = [&](const Eigen::Vector2d& q) {
    if (q.x() >= lo.x() - eps && q.x() <= hi.x() + eps && q.y() >= lo.y() - eps &&
        q.y() <= hi.y() + eps)
      cand.push_back({std::clamp(q.x(), lo.x(), hi.x()), std::clamp(q.y(), lo.y(), hi.y())});
  };

  const int n = static_cast<int>(pts.rows());
  if (n >= 3) {
    auto tris = delaunay_triangulate(pts);
    std::set<std::pair<int, int>> edges;
    auto edge = [&](int a, int b) {
      auto mm = std::minmax(a, b);
      edges.insert({mm.first, mm.second});
    };
    for (const auto& t : tris) {
      auto cc = circumcircle(pts.row(t.a).transpose(), pts.row(t.b).transpose(),
                             pts.row(t.c).transpose());
      if (cc) add_inside(cc->center);
      edge(t.a, t.b);
      edge(t.b, t.c);
      edge(t.c, t.a);
    }
    for (const auto& [a, b] : edges)
      detail::bisector_box_hits(pts.row(a).transpose(), pts.row(b).transpose(), lo, hi,
                                cand);
  } else if (n == 2) {
    detail::bisector_box_hits(pts.row(0).transpose(), pts.row(1).transpose(), lo, hi,
                              cand);
  }

  Circle best;
  bool first = true;
  for (const auto& c : cand) {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      d = std::min(d, (pts.row(i).transpose() - c).norm());
    if (first || d > best.radius) {
      best.center = c;
      best.radius = d;
      first = false;
    }
  }
  return best;
}

}  // namespace relnet
