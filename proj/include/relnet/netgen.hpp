#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relnet/drawing.hpp"
#include "relnet/graph.hpp"
#include "relnet/rng.hpp"
#include "relnet/types.hpp"

namespace relnet {

/// Pair of a graph and its natural drawing.
struct DrawnGraph {
  Graph graph;
  Drawing drawing;
};

// ---------------------------------------------------------------------------
// Integer lattice boxes
// ---------------------------------------------------------------------------

/// Finite box of the d-dimensional integer lattice, optionally h-fuzzed.
/// Node ids are row-major over (point - lo); within a box the graphical
/// distance of the unit-step graph equals the l1 distance, so the fuzz can
/// be built directly from l1 offsets.
struct LatticeBox {
  Eigen::VectorXi lo;
  Eigen::VectorXi hi;  // inclusive
  int fuzz = 1;
  Graph graph;
  Drawing drawing;

  int dim() const { return static_cast<int>(lo.size()); }

  std::size_t axis_size(int i) const { return static_cast<std::size_t>(hi[i] - lo[i] + 1); }

  bool contains(const Eigen::VectorXi& p) const {
    for (int i = 0; i < dim(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }

  NodeId index_of(const Eigen::VectorXi& p) const {
    std::size_t id = 0;
    for (int i = 0; i < dim(); ++i) id = id * axis_size(i) + static_cast<std::size_t>(p[i] - lo[i]);
    return static_cast<NodeId>(id);
  }

  Eigen::VectorXi point_of(NodeId id) const {
    Eigen::VectorXi p(dim());
    std::size_t rem = id;
    for (int i = dim() - 1; i >= 0; --i) {
      p[i] = lo[i] + static_cast<int>(rem % axis_size(i));
      rem /= axis_size(i);
    }
    return p;
  }
};

namespace detail {

/// All nonzero integer offsets with l1 norm <= h whose first nonzero
/// component is positive (one representative per +-pair).
inline std::vector<Eigen::VectorXi> positive_l1_offsets(int dim, int h) {
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi o = Eigen::VectorXi::Zero(dim);
  // odometer over [-h, h]^dim filtered by l1 and lex sign
  std::vector<int> v(dim, -h);
  while (true) {
    int l1 = 0;
    for (int i = 0; i < dim; ++i) l1 += std::abs(v[i]);
    if (l1 >= 1 && l1 <= h) {
      int first = 0;
      while (first < dim && v[first] == 0) ++first;
      if (first < dim && v[first] > 0) {
        for (int i = 0; i < dim; ++i) o[i] = v[i];
        out.push_back(o);
      }
    }
    int i = dim - 1;
    while (i >= 0 && v[i] == h) v[i--] = -h;
    if (i < 0) break;
    ++v[i];
  }
  return out;
}

}  // namespace detail

/// Builds the lattice box [lo, hi]^d with edges between points at l1
/// distance in [1, fuzz]. Edges run from the lower id to the higher.
inline LatticeBox make_lattice_box(const Eigen::VectorXi& lo, const Eigen::VectorXi& hi,
                                   int fuzz = 1) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw precondition_error("make_lattice_box: bad bounds");
  for (int i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw precondition_error("make_lattice_box: empty axis");
  if (fuzz < 1) throw precondition_error("make_lattice_box: fuzz must be >= 1");
  LatticeBox box;
  box.lo = lo;
  box.hi = hi;
  box.fuzz = fuzz;
  const int d = box.dim();
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= box.axis_size(i);

  auto offsets = detail::positive_l1_offsets(d, fuzz);
  GraphBuilder b(n, static_cast<std::size_t>(-1));
  Eigen::MatrixXd coords(n, d);
  Eigen::VectorXi p = lo, q(d);
  for (NodeId id = 0; id < n; ++id) {
    p = box.point_of(id);
    for (int i = 0; i < d; ++i) coords(id, i) = p[i];
    for (const auto& o : offsets) {
      q = p + o;
      if (box.contains(q)) b.add_edge(id, box.index_of(q));
    }
  }
  box.graph = b.build();
  box.drawing = Drawing{d, std::move(coords)};
  return box;
}

/// d-dimensional lattice box [-m, m]^d with fuzz h and natural drawing.
inline LatticeBox gen_lattice(int dim, int half_width, int fuzz = 1) {
  if (dim < 1) throw precondition_error("gen_lattice: dim must be >= 1");
  if (half_width < 0) throw precondition_error("gen_lattice: negative half width");
  Eigen::VectorXi lo = Eigen::VectorXi::Constant(dim, -half_width);
  Eigen::VectorXi hi = Eigen::VectorXi::Constant(dim, half_width);
  return make_lattice_box(lo, hi, fuzz);
}

// ---------------------------------------------------------------------------
// Triangular lattice
// ---------------------------------------------------------------------------

/// rows x cols patch of the triangular lattice in axial coordinates
/// (row, col); interior nodes have degree six and every edge has unit
/// length in the drawing (col + row/2, row * sqrt(3)/2).
inline DrawnGraph gen_triangular(int rows, int cols) {
  if (rows < 1 || cols < 1) throw precondition_error("gen_triangular: empty patch");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  auto id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  GraphBuilder b(n, static_cast<std::size_t>(-1));
  Eigen::MatrixXd coords(n, 2);
  const double root3_2 = std::sqrt(3.0) / 2.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      coords(id(r, c), 0) = c + 0.5 * r;
      coords(id(r, c), 1) = r * root3_2;
      if (c + 1 < cols) b.add_edge(id(r, c), id(r, c + 1));
      if (r + 1 < rows) b.add_edge(id(r, c), id(r + 1, c));
      if (r + 1 < rows && c - 1 >= 0) b.add_edge(id(r, c), id(r + 1, c - 1));
    }
  }
  return DrawnGraph{b.build(), Drawing{2, std::move(coords)}};
}

// ---------------------------------------------------------------------------
// Geometric graphs
// ---------------------------------------------------------------------------

/// Geometric graph over the given points: an edge for every pair with
/// 0 < distance <= range. Coincident points are rejected.
inline DrawnGraph gen_geometric(const Eigen::MatrixXd& points, double range,
                                std::size_t max_degree = kDefaultMaxDegree) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw precondition_error("gen_geometric: no points");
  if (range <= 0) throw precondition_error("gen_geometric: range must be positive");
  GraphBuilder b(n, max_degree);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = (points.row(i) - points.row(j)).norm();
      if (d == 0.0)
        throw precondition_error("gen_geometric: coincident points " + std::to_string(i) +
                                 " and " + std::to_string(j));
      if (d <= range) b.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return DrawnGraph{b.build(), Drawing{static_cast<int>(points.cols()), points}};
}

/// Uniform points in a box, seeded; convenience for geometric families.
inline Eigen::MatrixXd random_points(std::size_t n, const Box& box, std::uint64_t seed) {
  Eigen::MatrixXd pts(n, box.dim());
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 eng = seeded_engine(seed, i);
    for (int j = 0; j < box.dim(); ++j) {
      std::uniform_real_distribution<double> dist(box.lo[j], box.hi[j]);
      pts(i, j) = dist(eng);
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Regular trees
// ---------------------------------------------------------------------------

/// Rooted tree in which every node down to the given depth has `branching`
/// children. Ids are breadth-first; the drawing spreads leaves at unit
/// spacing with depth on the vertical axis.
inline DrawnGraph gen_regular_tree(int branching, int depth) {
  if (branching < 1) throw precondition_error("gen_regular_tree: branching must be >= 1");
  if (depth < 0) throw precondition_error("gen_regular_tree: negative depth");
  std::size_t n = 0, level_size = 1;
  for (int l = 0; l <= depth; ++l) {
    n += level_size;
    level_size *= branching;
  }
  GraphBuilder b(n, static_cast<std::size_t>(std::max<std::size_t>(branching + 1, 2)));
  std::vector<int> level(n, 0);
  std::vector<NodeId> parent(n, kInvalidNode);
  NodeId next = 1;
  for (NodeId u = 0; u < n && next < n; ++u) {
    for (int c = 0; c < branching && next < n; ++c) {
      parent[next] = u;
      level[next] = level[u] + 1;
      b.add_edge(u, next);
      ++next;
    }
  }
  // leaves left to right, internals centered over their children
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, 2);
  double leaf_x = 0.0;
  std::vector<double> xsum(n, 0.0);
  std::vector<int> xcnt(n, 0);
  for (NodeId u = 0; u < n; ++u) {
    if (level[u] == depth) {
      coords(u, 0) = leaf_x;
      leaf_x += 1.0;
    }
  }
  for (NodeId u = static_cast<NodeId>(n); u-- > 1;) {
    if (level[u] == depth) {
      xsum[parent[u]] += coords(u, 0);
    } else {
      coords(u, 0) = xsum[u] / std::max(1, xcnt[u]);
      xsum[parent[u]] += coords(u, 0);
    }
    xcnt[parent[u]] += 1;
  }
  if (n > 1) coords(0, 0) = xsum[0] / std::max(1, xcnt[0]);
  for (NodeId u = 0; u < n; ++u) coords(u, 1) = static_cast<double>(depth - level[u]);
  return DrawnGraph{b.build(), Drawing{2, std::move(coords)}};
}

// ---------------------------------------------------------------------------
// Failed lattices
// ---------------------------------------------------------------------------

/// Failure budget for 2D lattices: any axis-aligned L x L window may contain
/// at most alpha * L^2 + beta failed nodes.
struct FailureSpec {
  double alpha = 0.0;
  double beta = 0.0;
  /// Independent thinning probability for the random mode.
  double fail_probability = 0.0;
  /// Explicit failure sites (lattice coordinates); bypasses the random mode.
  std::optional<std::vector<Eigen::Vector2i>> explicit_sites;
};

struct WindowViolation {
  int x = 0, y = 0, L = 0;
  int failures = 0;
  double budget = 0.0;
};

struct FailedLattice {
  LatticeBox box;                  // the intact lattice
  std::vector<char> failed;        // per box node
  std::vector<NodeId> giant_nodes; // box ids of the largest surviving component
  Graph giant;                     // induced subgraph (original ids = box ids)
  Drawing giant_drawing;
  int min_L = 0;
  std::size_t num_failed = 0;
};

/// Smallest window size L with alpha * L^2 + beta <= L - 1.
inline int find_min_L(double alpha, double beta) {
  for (int L = 1; L <= 1000000; ++L)
    if (alpha * L * L + beta <= L - 1.0) return L;
  throw precondition_error("find_min_L: no window size satisfies the budget");
}

namespace detail {

/// Scans every integer-anchored square window; returns the worst violation.
inline std::optional<WindowViolation> worst_window(const LatticeBox& box,
                                                   const std::vector<char>& failed,
                                                   double alpha, double beta) {
  const int W = static_cast<int>(box.axis_size(0));
  const int H = static_cast<int>(box.axis_size(1));
  // 2D prefix sums over failure indicators
  std::vector<int> pre((W + 1) * (H + 1), 0);
  auto at = [&](int x, int y) -> int& { return pre[x * (H + 1) + y]; };
  Eigen::VectorXi p(2);
  for (int x = 0; x < W; ++x)
    for (int y = 0; y < H; ++y) {
      p[0] = box.lo[0] + x;
      p[1] = box.lo[1] + y;
      at(x + 1, y + 1) = failed[box.index_of(p)] + at(x, y + 1) + at(x + 1, y) - at(x, y);
    }
  std::optional<WindowViolation> worst;
  double worst_excess = 0.0;
  for (int L = 1; L <= std::max(W, H); ++L) {
    double budget = alpha * static_cast<double>(L) * L + beta;
    for (int x = 0; x + 1 <= W; ++x) {
      if (x + L > W && x > 0) break;
      int x2 = std::min(x + L, W);
      for (int y = 0; y + 1 <= H; ++y) {
        if (y + L > H && y > 0) break;
        int y2 = std::min(y + L, H);
        int cnt = at(x2, y2) - at(x, y2) - at(x2, y) + at(x, y);
        double excess = cnt - budget;
        if (excess > 0 && excess > worst_excess) {
          worst_excess = excess;
          worst = WindowViolation{box.lo[0] + x, box.lo[1] + y, L, cnt, budget};
        }
      }
    }
  }
  return worst;
}

}  // namespace detail

/// 2D lattice box [-m, m]^2 with failed nodes removed. Random mode thins
/// nodes independently and then repairs any window-budget violations by
/// reviving nodes inside the worst window until the (alpha, beta) constraint
/// validates; the explicit mode rejects invalid site lists outright.
/// Requires alpha < 1 / (4 (beta + 1)).
inline FailedLattice gen_failed_lattice(int half_width, const FailureSpec& spec,
                                        std::uint64_t seed = 0) {
  if (spec.alpha <= 0 || spec.beta < 0)
    throw precondition_error("gen_failed_lattice: need alpha > 0 and beta >= 0");
  if (spec.alpha >= 1.0 / (4.0 * (spec.beta + 1.0)))
    throw precondition_error("gen_failed_lattice: alpha must be below 1/(4(beta+1))");
  FailedLattice out;
  out.box = gen_lattice(2, half_width, 1);
  out.min_L = find_min_L(spec.alpha, spec.beta);
  const std::size_t n = out.box.graph.num_nodes();
  out.failed.assign(n, 0);

  if (spec.explicit_sites) {
    for (const auto& s : *spec.explicit_sites) {
      Eigen::VectorXi p(2);
      p << s[0], s[1];
      if (!out.box.contains(p))
        throw precondition_error("gen_failed_lattice: explicit site outside the box");
      out.failed[out.box.index_of(p)] = 1;
    }
    if (auto v = detail::worst_window(out.box, out.failed, spec.alpha, spec.beta))
      throw precondition_error(
          "gen_failed_lattice: explicit sites break the window budget at [" +
          std::to_string(v->x) + "," + std::to_string(v->y) + "], size " +
          std::to_string(v->L) + " (" + std::to_string(v->failures) + " > " +
          std::to_string(v->budget) + ")");
  } else {
    double p = spec.fail_probability > 0 ? spec.fail_probability : spec.alpha;
    for (std::size_t i = 0; i < n; ++i) {
      std::mt19937_64 eng = seeded_engine(seed, i);
      std::uniform_real_distribution<double> dist(0.0, 1.0);
      out.failed[i] = dist(eng) < p ? 1 : 0;
    }
    while (auto v = detail::worst_window(out.box, out.failed, spec.alpha, spec.beta)) {
      // revive the smallest-id failed node inside the worst window
      bool fixed = false;
      Eigen::VectorXi q(2);
      for (int x = v->x; x < v->x + v->L && !fixed; ++x)
        for (int y = v->y; y < v->y + v->L && !fixed; ++y) {
          q << x, y;
          if (!out.box.contains(q)) continue;
          NodeId id = out.box.index_of(q);
          if (out.failed[id]) {
            out.failed[id] = 0;
            fixed = true;
          }
        }
      if (!fixed) throw solve_error("gen_failed_lattice: repair loop stalled");
    }
  }
  out.num_failed = static_cast<std::size_t>(std::count(out.failed.begin(), out.failed.end(), 1));

  std::vector<NodeId> survivors;
  survivors.reserve(n - out.num_failed);
  for (NodeId u = 0; u < n; ++u)
    if (!out.failed[u]) survivors.push_back(u);
  Graph surv = induced_subgraph(out.box.graph, survivors);
  int count = 0;
  std::vector<int> label = component_labels(surv, &count);
  std::vector<std::size_t> size(count, 0);
  for (int l : label) ++size[l];
  int best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
  out.giant_nodes.clear();
  for (NodeId u = 0; u < surv.num_nodes(); ++u)
    if (label[u] == best) out.giant_nodes.push_back(static_cast<NodeId>(surv.original_id(u)));
  out.giant = induced_subgraph(out.box.graph, out.giant_nodes);
  Eigen::MatrixXd coords(out.giant_nodes.size(), 2);
  for (std::size_t i = 0; i < out.giant_nodes.size(); ++i)
    coords.row(i) = out.box.drawing.coords.row(out.giant_nodes[i]);
  out.giant_drawing = Drawing{2, std::move(coords)};
  return out;
}

}  // namespace relnet
