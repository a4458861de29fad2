#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relnet/delaunay.hpp"
#include "relnet/drawing.hpp"
#include "relnet/graph.hpp"
#include "relnet/netgen.hpp"
#include "relnet/types.hpp"

namespace relnet {

// ---------------------------------------------------------------------------
// Affine distance bounds
// ---------------------------------------------------------------------------

enum class AffineDirection {
  kGraphicalVsEuclidean,  // d_G <= alpha * d_f + beta
  kEuclideanVsGraphical,  // d_f <= alpha * d_G + beta
};

struct AffineMajorant {
  double alpha = 0.0;
  double beta = 0.0;
};

namespace detail {

/// Minimal-slope affine majorant of a finite point cloud: the rightmost edge
/// of the upper convex hull, with the intercept clamped to be non-negative.
inline AffineMajorant min_slope_majorant(std::vector<std::pair<double, double>> pts) {
  AffineMajorant out;
  if (pts.empty()) return out;
  std::sort(pts.begin(), pts.end());
  // keep only the highest y per x
  std::vector<std::pair<double, double>> top;
  for (const auto& p : pts) {
    if (!top.empty() && top.back().first == p.first)
      top.back().second = std::max(top.back().second, p.second);
    else
      top.push_back(p);
  }
  double ymax = 0.0;
  for (const auto& p : top) ymax = std::max(ymax, p.second);
  // upper hull, left to right
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : top) {
    while (hull.size() >= 2) {
      auto& a = hull[hull.size() - 2];
      auto& b = hull[hull.size() - 1];
      double cross = (b.first - a.first) * (p.second - a.second) -
                     (b.second - a.second) * (p.first - a.first);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  if (hull.size() == 1) {
    const auto& [x, y] = hull.front();
    if (x > 0) {
      out.alpha = y / x;
      out.beta = 0.0;
    } else {
      out.alpha = 0.0;
      out.beta = y;
    }
    return out;
  }
  const auto& a = hull[hull.size() - 2];
  const auto& b = hull[hull.size() - 1];
  double slope = (b.second - a.second) / (b.first - a.first);
  if (slope <= 0.0) {
    out.alpha = 0.0;
    out.beta = ymax;
    return out;
  }
  out.alpha = slope;
  out.beta = std::max(0.0, b.second - slope * b.first);
  return out;
}

}  // namespace detail

/// Tightest-slope affine relation between graphical and drawn distances over
/// every connected node pair, exact on the finite sample.
inline AffineMajorant affine_distance_constants(const Graph& g, const Drawing& f,
                                                AffineDirection dir) {
  if (g.num_nodes() != f.num_nodes())
    throw precondition_error("affine_distance_constants: drawing size mismatch");
  std::vector<std::pair<double, double>> pts;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    std::vector<int> d = bfs_distances(g, u);
    for (NodeId v = u + 1; v < g.num_nodes(); ++v) {
      if (d[v] < 0) continue;
      double df = (f.coords.row(u) - f.coords.row(v)).norm();
      double dg = static_cast<double>(d[v]);
      if (dir == AffineDirection::kGraphicalVsEuclidean)
        pts.push_back({df, dg});
      else
        pts.push_back({dg, df});
    }
  }
  return detail::min_slope_majorant(std::move(pts));
}

// ---------------------------------------------------------------------------
// Drawing parameters
// ---------------------------------------------------------------------------

struct ParamOptions {
  std::vector<int> cutoffs = {1};
  std::optional<Box> region;     // gamma evaluation region; default bbox shrunk by r
  double grid_resolution = 0.0;  // bracket scan step outside the plane; 0 = s/4
};

struct DrawingParams {
  double s = 0.0;         // minimum node distance
  double r = 0.0;         // maximum connected range (longest edge)
  double gamma_lo = 0.0;  // largest verified-empty ball diameter
  double gamma_hi = 0.0;  // upper bound; equals gamma_lo when exact
  double gamma_resolution = 0.0;  // 0 when exact
  std::map<int, double> rho;      // cutoff n -> min d_f/d_G over pairs with d_G >= n
  AffineMajorant affine;          // d_G <= alpha * d_f + beta
  Box region;
  bool connected = false;

  double gamma() const { return gamma_hi; }
};

namespace detail {

inline double nearest_node_distance(const Drawing& f, const Eigen::VectorXd& c) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < f.coords.rows(); ++i)
    best = std::min(best, (f.coords.row(i).transpose() - c).norm());
  return best;
}

inline void gamma_line(const Drawing& f, const Box& region, DrawingParams& out) {
  std::vector<double> xs(f.coords.rows());
  for (Eigen::Index i = 0; i < f.coords.rows(); ++i) xs[i] = f.coords(i, 0);
  std::sort(xs.begin(), xs.end());
  const double lo = region.lo[0], hi = region.hi[0];
  std::vector<double> cand = {lo, hi};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    cand.push_back(std::clamp(0.5 * (xs[i] + xs[i + 1]), lo, hi));
  double best = 0.0;
  Eigen::VectorXd c(1);
  for (double x : cand) {
    c[0] = x;
    best = std::max(best, nearest_node_distance(f, c));
  }
  out.gamma_lo = out.gamma_hi = 2.0 * best;
  out.gamma_resolution = 0.0;
}

inline void gamma_plane(const Drawing& f, const Box& region, DrawingParams& out) {
  Circle lec = largest_empty_circle(f.coords, region);
  out.gamma_lo = out.gamma_hi = 2.0 * lec.radius;
  out.gamma_resolution = 0.0;
}

inline void gamma_grid(const Drawing& f, const Box& region, double res,
                       DrawingParams& out) {
  const int d = region.dim();
  std::vector<int> steps(d);
  double res_eff = res;
  for (int i = 0; i < d; ++i) {
    double span = region.hi[i] - region.lo[i];
    res_eff = std::max(res_eff, span / 100.0);  // cost guard
  }
  for (int i = 0; i < d; ++i) {
    double span = region.hi[i] - region.lo[i];
    steps[i] = std::max(1, static_cast<int>(std::floor(span / res_eff)) + 1);
  }
  double best = 0.0;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd c(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      double span = region.hi[i] - region.lo[i];
      c[i] = region.lo[i] + span * idx[i] / steps[i];
    }
    best = std::max(best, nearest_node_distance(f, c));
    int i = d - 1;
    while (i >= 0 && idx[i] == steps[i]) idx[i--] = 0;
    if (i < 0) break;
    ++idx[i];
  }
  // grid spacing per axis is below res_eff, so the true best center lies
  // within (res_eff / 2) * sqrt(d) of a visited grid point
  out.gamma_lo = 2.0 * best;
  out.gamma_hi = 2.0 * best + res_eff * std::sqrt(static_cast<double>(d));
  out.gamma_resolution = res_eff;
}

}  // namespace detail

/// Measures the four drawing parameters on a finite drawn graph: min node
/// distance, max connected range, max uncovered diameter over a region
/// (exact on the line and in the plane, a stated-resolution bracket above),
/// and the distance-ratio curve rho(n), together with the affine constants.
inline DrawingParams drawing_params(const Graph& g, const Drawing& f,
                                    const ParamOptions& opts = {}) {
  if (g.num_nodes() != f.num_nodes())
    throw precondition_error("drawing_params: drawing size mismatch");
  if (g.num_nodes() < 2)
    throw precondition_error("drawing_params: need at least two nodes");
  DrawingParams out;

  double s2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < f.coords.rows(); ++i)
    for (Eigen::Index j = i + 1; j < f.coords.rows(); ++j)
      s2 = std::min(s2, (f.coords.row(i) - f.coords.row(j)).squaredNorm());
  out.s = std::sqrt(s2);

  out.r = 0.0;
  for (const Edge& e : g.edges())
    out.r = std::max(out.r, (f.coords.row(e.tail) - f.coords.row(e.head)).norm());

  out.region = opts.region ? *opts.region : Box::bounding(f).shrunk(out.r);
  if (out.region.dim() != f.dim)
    throw precondition_error("drawing_params: region dimension mismatch");
  double res = opts.grid_resolution > 0 ? opts.grid_resolution
                                        : std::max(out.s / 4.0, 1e-9);
  if (f.dim == 1) detail::gamma_line(f, out.region, out);
  else if (f.dim == 2) detail::gamma_plane(f, out.region, out);
  else detail::gamma_grid(f, out.region, res, out);

  out.connected = is_weakly_connected(g);
  for (int cutoff : opts.cutoffs) {
    if (cutoff < 1) throw precondition_error("drawing_params: cutoffs must be >= 1");
    out.rho[cutoff] = out.connected ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (out.connected) {
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      std::vector<int> d = bfs_distances(g, u);
      for (NodeId v = u + 1; v < g.num_nodes(); ++v) {
        double df = (f.coords.row(u) - f.coords.row(v)).norm();
        for (int cutoff : opts.cutoffs)
          if (d[v] >= cutoff)
            out.rho[cutoff] = std::min(out.rho[cutoff], df / d[v]);
      }
    }
    for (int cutoff : opts.cutoffs)
      if (!std::isfinite(out.rho[cutoff])) out.rho[cutoff] = 0.0;
  }

  out.affine = affine_distance_constants(g, f, AffineDirection::kGraphicalVsEuclidean);
  return out;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct ClassifyThresholds {
  double min_s = 1e-9;
  double max_r = std::numeric_limits<double>::infinity();
  double max_gamma = std::numeric_limits<double>::infinity();
  double min_rho = 0.05;
};

struct ClassificationReport {
  DrawingParams params;
  ClassifyThresholds thresholds;
  bool sparse_evidence = false;  // s and r within bounds
  bool dense_evidence = false;   // gamma and rho within bounds
  std::string note;
};

/// Finite-sample evidence for the sparse (civilized) and dense drawing
/// properties. A single box can never decide the asymptotic class; the
/// report says so explicitly.
inline ClassificationReport classify(const Graph& g, const Drawing& f,
                                     const ClassifyThresholds& th = {},
                                     const ParamOptions& opts = {}) {
  ClassificationReport out;
  out.params = drawing_params(g, f, opts);
  out.thresholds = th;
  out.sparse_evidence = out.params.s >= th.min_s && out.params.r <= th.max_r;
  double rho_at_deepest = 0.0;
  if (!out.params.rho.empty()) rho_at_deepest = out.params.rho.rbegin()->second;
  out.dense_evidence =
      out.params.gamma_hi <= th.max_gamma && rho_at_deepest >= th.min_rho;
  out.note =
      "finite-sample evidence on one box; the asymptotic drawing class is not "
      "decidable from a finite graph";
  return out;
}

// ---------------------------------------------------------------------------
// Dimensional incompatibility
// ---------------------------------------------------------------------------

struct IncompatibilityReport {
  int lattice_dim = 0;
  int drawing_dim = 0;
  int half_width = 0;
  std::size_t nodes = 0;
  int graph_diameter = 0;
  double min_spacing = 1.0;
  double range_lower_bound = 0.0;  // forced maximum edge length
  bool obstruction = false;
  std::string summary;
};

/// Counting obstruction to drawing a d-dimensional lattice box in fewer
/// dimensions: n nodes with spacing s need drawn extent that grows faster
/// than the graph diameter, so some edge on a diameter path must stretch.
/// The reported bound is extent / diameter, with extent s(n-1) on the line
/// and the packing bound (s/2)(n^(1/d') - 1) above.
inline IncompatibilityReport incompatibility_demo(int lattice_dim, int drawing_dim,
                                                  int half_width,
                                                  double min_spacing = 1.0) {
  if (lattice_dim < 1 || drawing_dim < 1 || half_width < 1)
    throw precondition_error("incompatibility_demo: bad dimensions");
  IncompatibilityReport out;
  out.lattice_dim = lattice_dim;
  out.drawing_dim = drawing_dim;
  out.half_width = half_width;
  out.min_spacing = min_spacing;
  double nodes = std::pow(2.0 * half_width + 1.0, lattice_dim);
  out.nodes = static_cast<std::size_t>(nodes);
  out.graph_diameter = 2 * lattice_dim * half_width;
  if (drawing_dim >= lattice_dim) {
    out.obstruction = false;
    out.range_lower_bound = 0.0;
    out.summary = "no obstruction: the lattice draws natively in " +
                  std::to_string(drawing_dim) + " dimensions";
    return out;
  }
  double extent =
      drawing_dim == 1
          ? min_spacing * (nodes - 1.0)
          : 0.5 * min_spacing * (std::pow(nodes, 1.0 / drawing_dim) - 1.0);
  out.range_lower_bound = extent / out.graph_diameter;
  out.obstruction = true;
  out.summary = "any drawing in " + std::to_string(drawing_dim) +
                " dimensions with node spacing >= " + std::to_string(min_spacing) +
                " forces an edge of length >= " + std::to_string(out.range_lower_bound) +
                "; the bound grows with the box, so no single drawing is both "
                "civilized and faithful";
  return out;
}

// ---------------------------------------------------------------------------
// Worked example
// ---------------------------------------------------------------------------

struct WorkedExample {
  DrawnGraph drawn;
  Box gamma_region;
  double s = 1.0;
  double r = 0.0;        // sqrt(10)
  double gamma = 2.0;
  double rho = 0.2;      // up to cutoff five
};

/// Small irregular drawing with every parameter known in closed form: a
/// six-node horseshoe whose open ends sit at unit distance but five hops
/// apart (s = 1, rho = 1/5), three edges of length sqrt(10) (r), and a unit
/// hexagon ring whose open center holds an empty ball of diameter exactly 2
/// (gamma, over the companion region).
inline WorkedExample worked_example() {
  WorkedExample out;
  Eigen::MatrixXd pts(12, 2);
  pts << 0.0, 0.0,    // 0: horseshoe end
         3.0, -1.0,   // 1
         6.0, 0.0,    // 2
         6.0, 2.0,    // 3
         3.0, 2.0,    // 4
         0.0, 1.0,    // 5: other end, unit distance from node 0
         11.0, 0.5,   // 6: hexagon ring around (10, 0.5)
         10.5, 0.5 + std::sqrt(3.0) / 2.0,   // 7
         9.5, 0.5 + std::sqrt(3.0) / 2.0,    // 8
         9.0, 0.5,    // 9
         9.5, 0.5 - std::sqrt(3.0) / 2.0,    // 10
         10.5, 0.5 - std::sqrt(3.0) / 2.0;   // 11
  GraphBuilder b(12);
  b.add_edge(0, 1).add_edge(1, 2).add_edge(2, 3).add_edge(3, 4).add_edge(4, 5);
  b.add_edge(2, 9);  // bridge into the ring
  b.add_edge(6, 7).add_edge(7, 8).add_edge(8, 9).add_edge(9, 10).add_edge(10, 11).add_edge(11, 6);
  out.drawn.graph = b.build();
  out.drawn.drawing = Drawing{2, pts};
  out.gamma_region.lo = Eigen::Vector2d(9.8, 0.3);
  out.gamma_region.hi = Eigen::Vector2d(10.2, 0.7);
  out.r = std::sqrt(10.0);
  return out;
}

}  // namespace relnet
