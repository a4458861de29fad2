#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relnet/drawing.hpp"
#include "relnet/geometry.hpp"
#include "relnet/graph.hpp"
#include "relnet/netgen.hpp"
#include "relnet/rng.hpp"
#include "relnet/types.hpp"

namespace relnet {

// ---------------------------------------------------------------------------
// Sparse direction: civilized drawing -> fuzzed lattice box
// ---------------------------------------------------------------------------

struct SparseEmbedCertificate {
  double cell_side = 0.0;
  int h = 1;
  LatticeBox target;  // h-fuzzed lattice box over the occupied cell range
  Embedding eta;      // graph node -> target lattice node
  EmbeddingCheck check;
  /// l1(eta(u), eta(v)) >= sqrt(d) * (d_f / s - 2) for every pair (up to
  /// 1e-9; the inequality is guaranteed for drawings in at most four
  /// dimensions).
  bool distance_bound_ok = false;
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// Embeds a civilized drawn graph into a fuzzed lattice box by cell rounding:
/// cells of side s / sqrt(d) contain at most one node each, and h is the
/// largest cell l1 distance spanned by an edge.
inline SparseEmbedCertificate sparse_embed(const Graph& g, const Drawing& f) {
  if (g.num_nodes() != f.num_nodes())
    throw precondition_error("sparse_embed: drawing size mismatch");
  if (g.num_nodes() < 2)
    throw precondition_error("sparse_embed: need at least two nodes");
  const int d = f.dim;
  const NodeId n = g.num_nodes();

  double s2 = std::numeric_limits<double>::infinity();
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      s2 = std::min(s2, (f.coords.row(u) - f.coords.row(v)).squaredNorm());
  double s = std::sqrt(s2);
  if (!(s > 0))
    throw precondition_error("sparse_embed: coincident nodes, drawing is not civilized");

  SparseEmbedCertificate out;
  out.cell_side = s / std::sqrt(static_cast<double>(d));

  Eigen::MatrixXi cells(n, d);
  for (NodeId u = 0; u < n; ++u)
    for (int i = 0; i < d; ++i)
      cells(u, i) = static_cast<int>(std::floor(f.coords(u, i) / out.cell_side));

  int h = 1;
  for (const Edge& e : g.edges()) {
    int l1 = (cells.row(e.tail) - cells.row(e.head)).cwiseAbs().sum();
    h = std::max(h, l1);
  }
  out.h = h;

  Eigen::VectorXi lo = cells.colwise().minCoeff().transpose();
  Eigen::VectorXi hi = cells.colwise().maxCoeff().transpose();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    total *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    if (total > 5000000)
      throw precondition_error("sparse_embed: occupied cell range too large");
  }
  out.target = make_lattice_box(lo, hi, h);

  out.eta.map.resize(n);
  std::map<std::vector<int>, NodeId> seen;
  for (NodeId u = 0; u < n; ++u) {
    std::vector<int> key(d);
    for (int i = 0; i < d; ++i) key[i] = cells(u, i);
    auto [it, inserted] = seen.insert({key, u});
    if (!inserted)
      throw precondition_error("sparse_embed: two nodes share a cell, nodes " +
                               std::to_string(it->second) + " and " + std::to_string(u));
    out.eta.map[u] = out.target.index_of(cells.row(u).transpose());
  }
  out.check = verify_embedding(out.eta, g, out.target.graph);

  const double sqrt_d = std::sqrt(static_cast<double>(d));
  out.distance_bound_ok = true;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) {
      double df = (f.coords.row(u) - f.coords.row(v)).norm();
      double l1 = (cells.row(u) - cells.row(v)).cwiseAbs().sum();
      double margin = l1 - sqrt_d * (df / s - 2.0);
      out.worst_margin = std::min(out.worst_margin, margin);
      if (margin < -1e-9) out.distance_bound_ok = false;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Dense direction: dense drawing <- lattice window
// ---------------------------------------------------------------------------

struct DenseEmbedOptions {
  std::optional<double> gamma;            // override the measured gamma
  std::optional<AffineMajorant> affine;   // override the measured constants
  std::optional<Box> region;              // default: bounding box shrunk by r
  std::size_t max_pairs = 200000;         // distance-bound sampling cap
  std::uint64_t seed = 0;
};

struct DenseEmbedCertificate {
  double gamma = 0.0;
  AffineMajorant affine;
  LatticeBox window;  // unit-step lattice of scaled ball centers
  Embedding eta;      // window node -> graph node (one per ball)
  int h = 1;          // max graphical distance between images of adjacent centers
  int h_formula = 1;  // ceil(2 * alpha * gamma + beta)
  int c = 0;          // max over covered nodes of d_G(u, eta(xi(u)))
  int c_formula = 0;  // ceil(1.5 * alpha * gamma * sqrt(d) + beta)
  std::vector<NodeId> xi;    // graph node -> nearest window node
  std::vector<char> covered; // nodes within sqrt(d) of their center (scaled)
  std::size_t num_covered = 0;
  EmbeddingCheck check;      // eta : window -> h-fuzz of the graph
  /// l1(xi(u), xi(v)) <= 4d + (sqrt(d) / gamma) * d_f for covered pairs.
  bool distance_bound_ok = false;
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// Embeds a unit lattice window into (the h-fuzz of) a densely drawn graph.
/// After scaling the drawing by 1 / gamma, every unit-diameter ball around an
/// integer point of the window contains a node; eta picks the one nearest the
/// center. Both certificate radii are measured (h, c) and also reported as
/// the affine-constant formulas they are bounded by asymptotically.
inline DenseEmbedCertificate dense_embed(const Graph& g, const Drawing& f,
                                         const DenseEmbedOptions& opts = {}) {
  if (g.num_nodes() != f.num_nodes())
    throw precondition_error("dense_embed: drawing size mismatch");
  if (g.num_nodes() < 2)
    throw precondition_error("dense_embed: need at least two nodes");
  const int d = f.dim;
  const NodeId n = g.num_nodes();
  const double sqrt_d = std::sqrt(static_cast<double>(d));

  DenseEmbedCertificate out;
  Box region;
  if (opts.gamma && opts.affine && opts.region) {
    region = *opts.region;
  } else {
    ParamOptions popts;
    popts.region = opts.region;
    DrawingParams params = drawing_params(g, f, popts);
    region = params.region;
    out.gamma = params.gamma_hi;
    out.affine = params.affine;
  }
  if (opts.gamma) out.gamma = *opts.gamma;
  if (opts.affine) out.affine = *opts.affine;
  if (!(out.gamma > 0))
    throw precondition_error("dense_embed: gamma must be positive");

  // integer points whose unit-diameter balls fit inside the scaled region
  Eigen::VectorXi wlo(d), whi(d);
  for (int i = 0; i < d; ++i) {
    double lo = region.lo[i] / out.gamma + 0.5;
    double hi = region.hi[i] / out.gamma - 0.5;
    wlo[i] = static_cast<int>(std::ceil(lo - 1e-9));
    whi[i] = static_cast<int>(std::floor(hi + 1e-9));
    if (wlo[i] > whi[i])
      throw precondition_error("dense_embed: region too small to hold a unit ball");
  }
  out.window = make_lattice_box(wlo, whi, 1);
  const NodeId w = out.window.graph.num_nodes();

  Eigen::MatrixXd scaled = f.coords / out.gamma;

  out.eta.map.assign(w, kInvalidNode);
  for (NodeId z = 0; z < w; ++z) {
    Eigen::VectorXd center = out.window.point_of(z).cast<double>();
    double best = std::numeric_limits<double>::infinity();
    NodeId pick = kInvalidNode;
    for (NodeId u = 0; u < n; ++u) {
      double dist = (scaled.row(u).transpose() - center).norm();
      // the tolerance admits nodes sitting exactly on the boundary of the
      // measured largest empty ball
      if (dist < 0.5 + 1e-9 && dist < best) {
        best = dist;
        pick = u;
      }
    }
    if (pick == kInvalidNode) {
      std::string at = "(";
      for (int i = 0; i < d; ++i)
        at += std::to_string(center[i] * out.gamma) + (i + 1 < d ? ", " : ")");
      throw precondition_error(
          "dense_embed: empty ball at " + at +
          ", the drawing is not dense at diameter gamma = " + std::to_string(out.gamma));
    }
    out.eta.map[z] = pick;
  }

  // graphical distances from every image
  std::vector<std::vector<int>> from_image(w);
  for (NodeId z = 0; z < w; ++z) from_image[z] = bfs_distances(g, out.eta.map[z]);

  int h = 1;
  for (const Edge& e : out.window.graph.edges()) {
    int dist = from_image[e.tail][out.eta.map[e.head]];
    if (dist < 0)
      throw precondition_error("dense_embed: images of adjacent centers are disconnected");
    h = std::max(h, dist);
  }
  out.h = h;
  // fp-guarded ceilings: the products sit exactly on integers for lattices
  out.h_formula = std::max(
      1, static_cast<int>(
             std::ceil(2.0 * out.affine.alpha * out.gamma + out.affine.beta - 1e-9)));
  out.c_formula = std::max(
      1, static_cast<int>(std::ceil(
             1.5 * out.affine.alpha * out.gamma * sqrt_d + out.affine.beta - 1e-9)));

  // nearest window center per node, via the corners of its unit cell
  out.xi.assign(n, kInvalidNode);
  out.covered.assign(n, 0);
  Eigen::VectorXi corner(d);
  for (NodeId u = 0; u < n; ++u) {
    double best = std::numeric_limits<double>::infinity();
    NodeId pick = kInvalidNode;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      for (int i = 0; i < d; ++i) {
        double x = scaled(u, i);
        int c = (mask >> i) & 1 ? static_cast<int>(std::ceil(x))
                                : static_cast<int>(std::floor(x));
        corner[i] = std::clamp(c, wlo[i], whi[i]);
      }
      double dist = (scaled.row(u).transpose() - corner.cast<double>()).norm();
      NodeId idx = out.window.index_of(corner);
      if (dist < best || (dist == best && idx < pick)) {
        best = dist;
        pick = idx;
      }
    }
    out.xi[u] = pick;
    if (best < sqrt_d + 1e-9) {
      out.covered[u] = 1;
      ++out.num_covered;
      int dist = from_image[pick][u];
      if (dist < 0)
        throw precondition_error("dense_embed: covered node unreachable from its image");
      out.c = std::max(out.c, dist);
    }
  }

  out.check = verify_embedding(out.eta, out.window.graph, h_fuzz(g, out.h));

  // distance bound over covered pairs, exhaustive or seeded sample
  std::vector<NodeId> cov;
  for (NodeId u = 0; u < n; ++u)
    if (out.covered[u]) cov.push_back(u);
  out.distance_bound_ok = true;
  auto check_pair = [&](NodeId u, NodeId v) {
    double df = (f.coords.row(u) - f.coords.row(v)).norm();
    double l1 = (out.window.point_of(out.xi[u]) - out.window.point_of(out.xi[v]))
                    .cwiseAbs()
                    .sum();
    double margin = 4.0 * d + sqrt_d / out.gamma * df - l1;
    out.worst_margin = std::min(out.worst_margin, margin);
    if (margin < -1e-9) out.distance_bound_ok = false;
  };
  std::size_t all_pairs = cov.size() * (cov.size() - 1) / 2;
  if (all_pairs <= opts.max_pairs) {
    for (std::size_t i = 0; i < cov.size(); ++i)
      for (std::size_t j = i + 1; j < cov.size(); ++j) check_pair(cov[i], cov[j]);
  } else {
    std::mt19937_64 eng = seeded_engine(opts.seed, 0xe9bed);
    std::uniform_int_distribution<std::size_t> pickc(0, cov.size() - 1);
    for (std::size_t t = 0; t < opts.max_pairs; ++t) {
      std::size_t i = pickc(eng), j = pickc(eng);
      if (i != j) check_pair(cov[i], cov[j]);
    }
  }
  return out;
}

}  // namespace relnet
