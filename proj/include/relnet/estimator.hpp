#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relnet/laplacian.hpp"
#include "relnet/network.hpp"
#include "relnet/spd.hpp"
#include "relnet/types.hpp"

namespace relnet {

/// Best linear unbiased estimates of all node variables relative to the
/// reference (whose estimate is pinned to zero), from the per-edge relative
/// measurements. Normal equations are solved on the reduced block Laplacian.
inline std::vector<Eigen::VectorXd> blue_solve(const MeasurementNetwork& net) {
  validate(net);
  if (!net.has_measurements())
    throw precondition_error("blue_solve: network carries no measurements");
  GroundedSystem sys(net.graph, net.k, net.covariance, net.reference);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.rows());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(net.k, net.k);
  for (std::size_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(net.covariance[e]);
    Eigen::VectorXd wz = ldlt.solve(net.measurements[e]);
    if (sys.row_of(ed.tail) >= 0) rhs.segment(sys.row_of(ed.tail), net.k) += wz;
    if (sys.row_of(ed.head) >= 0) rhs.segment(sys.row_of(ed.head), net.k) -= wz;
  }
  Eigen::VectorXd x = sys.solve(rhs);
  std::vector<Eigen::VectorXd> out(net.graph.num_nodes());
  for (NodeId u = 0; u < net.graph.num_nodes(); ++u) {
    if (sys.row_of(u) < 0)
      out[u] = Eigen::VectorXd::Zero(net.k);
    else
      out[u] = x.segment(sys.row_of(u), net.k);
  }
  return out;
}

/// Estimation-error covariance blocks Sigma_{u,o} for the given targets:
/// the (u,u) diagonal blocks of the inverse reduced block Laplacian. One
/// factorization, k solve columns per target.
inline std::vector<Block> blue_covariance(const MeasurementNetwork& net,
                                          const std::vector<NodeId>& targets) {
  validate(net);
  GroundedSystem sys(net.graph, net.k, net.covariance, net.reference);
  std::vector<Block> out;
  out.reserve(targets.size());
  for (NodeId u : targets) {
    if (u >= net.graph.num_nodes())
      throw precondition_error("blue_covariance: target out of range");
    if (u == net.reference) {
      out.push_back(Eigen::MatrixXd::Zero(net.k, net.k));
      continue;
    }
    Eigen::MatrixXd cols = sys.node_columns(u);
    Block s = sys.block_at(cols, u);
    out.push_back(0.5 * (s + s.transpose()));
  }
  return out;
}

/// One level of a nested-subgraph sequence: a network plus the ids of the
/// tracked target u and reference o inside it.
struct NestedLevel {
  MeasurementNetwork net;
  NodeId u = 0;
  NodeId o = 0;
};

/// Increasing subgraph sequence with explicit inclusion maps level -> level+1.
struct NestedSequence {
  std::vector<NestedLevel> levels;
  std::vector<Embedding> inclusion;
};

struct ConvergenceReport {
  std::vector<Block> sigma;   // covariance of u relative to o, per level
  bool monotone = false;      // PSD non-increasing along the sequence
  double worst_violation = 0.0;  // most negative eigenvalue observed
};

/// Computes Sigma on every level and checks the covariances are
/// non-increasing in the PSD order, which the growing measurement set
/// guarantees. Preconditions: verified inclusions carrying u and o upward,
/// with image-edge covariances dominated by their preimages.
inline ConvergenceReport nested_convergence(const NestedSequence& seq,
                                            double slack = 1e-10) {
  if (seq.levels.empty())
    throw precondition_error("nested_convergence: empty sequence");
  if (seq.inclusion.size() + 1 != seq.levels.size())
    throw precondition_error("nested_convergence: need one inclusion per step");
  for (std::size_t i = 0; i + 1 < seq.levels.size(); ++i) {
    const auto& lo = seq.levels[i];
    const auto& hi = seq.levels[i + 1];
    const Embedding& emb = seq.inclusion[i];
    EmbeddingCheck chk = verify_embedding(emb, lo.net.graph, hi.net.graph);
    if (!chk.ok)
      throw precondition_error("nested_convergence: level " + std::to_string(i) +
                               " does not embed into its successor");
    if (emb.map[lo.u] != hi.u || emb.map[lo.o] != hi.o)
      throw precondition_error("nested_convergence: u/o not carried by inclusion at level " +
                               std::to_string(i));
    for (std::size_t e = 0; e < lo.net.graph.num_edges(); ++e) {
      const Edge& ed = lo.net.graph.edge(e);
      auto img = hi.net.graph.find_edge(emb.map[ed.tail], emb.map[ed.head]);
      if (!img || !psd_less_equal(hi.net.covariance[*img], lo.net.covariance[e]))
        throw precondition_error(
            "nested_convergence: image covariance not dominated at level " +
            std::to_string(i) + ", edge " + std::to_string(e));
    }
  }
  ConvergenceReport out;
  for (const NestedLevel& lvl : seq.levels) {
    MeasurementNetwork net = lvl.net;
    net.reference = lvl.o;
    out.sigma.push_back(blue_covariance(net, {lvl.u}).front());
  }
  out.monotone = true;
  for (std::size_t i = 0; i + 1 < out.sigma.size(); ++i) {
    double gap = min_eigenvalue(out.sigma[i] - out.sigma[i + 1]);
    out.worst_violation = std::min(out.worst_violation, gap);
    if (gap < -slack) out.monotone = false;
  }
  return out;
}

}  // namespace relnet
