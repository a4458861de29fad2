#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "relnet/graph.hpp"
#include "relnet/network.hpp"
#include "relnet/types.hpp"

namespace relnet {

/// Reduced block Laplacian of a network with one node grounded, flattened to
/// an (n-1)k x (n-1)k sparse SPD system and factored once (sparse Cholesky,
/// minimum-degree ordering). Both the estimator and the electrical solver sit
/// on top of this.
class GroundedSystem {
 public:
  GroundedSystem(const Graph& g, int k, const std::vector<Block>& blocks,
                 NodeId grounded)
      : k_(k), n_(g.num_nodes()), grounded_(grounded) {
    if (grounded >= n_) throw precondition_error("GroundedSystem: grounded node out of range");
    if (k < 1) throw precondition_error("GroundedSystem: k must be >= 1");
    if (blocks.size() != g.num_edges())
      throw precondition_error("GroundedSystem: one block per edge required");
    require_connected_to_ground(g, grounded);

    row_.assign(n_, -1);
    int r = 0;
    for (NodeId u = 0; u < n_; ++u)
      if (u != grounded) row_[u] = r++;

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.num_edges() * 4 * k * k);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const Edge& ed = g.edge(e);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(blocks[e]);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw precondition_error("GroundedSystem: edge block " + std::to_string(e) +
                                 " is not positive definite");
      Eigen::MatrixXd w = ldlt.solve(eye);
      w = 0.5 * (w + w.transpose());
      add_block(trip, row_[ed.tail], row_[ed.tail], w, +1.0);
      add_block(trip, row_[ed.head], row_[ed.head], w, +1.0);
      add_block(trip, row_[ed.tail], row_[ed.head], w, -1.0);
      add_block(trip, row_[ed.head], row_[ed.tail], w, -1.0);
    }
    Eigen::SparseMatrix<double> L(rows(), rows());
    L.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(L);
    if (solver_.info() != Eigen::Success)
      throw solve_error("GroundedSystem: sparse Cholesky factorization failed");
  }

  int k() const { return k_; }
  NodeId grounded() const { return grounded_; }
  Eigen::Index rows() const { return static_cast<Eigen::Index>(n_ - 1) * k_; }

  /// Flattened row offset of a node's block, or -1 for the grounded node.
  Eigen::Index row_of(NodeId u) const {
    return row_[u] < 0 ? -1 : static_cast<Eigen::Index>(row_[u]) * k_;
  }

  /// Solves L X = B. Thread-safe: concurrent calls share the factorization.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    Eigen::MatrixXd x = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success)
      throw solve_error("GroundedSystem: solve failed");
    return x;
  }

  /// Columns of the reduced inverse belonging to node u, i.e. the solution of
  /// L X = E_u with an identity block in u's rows. (n-1)k x k.
  Eigen::MatrixXd node_columns(NodeId u) const {
    if (u >= n_) throw precondition_error("GroundedSystem: node out of range");
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows(), k_);
    if (row_of(u) < 0)
      throw precondition_error("GroundedSystem: grounded node has no columns");
    rhs.middleRows(row_of(u), k_) = Eigen::MatrixXd::Identity(k_, k_);
    return solve(rhs);
  }

  /// k x k block of a flattened solution at node p; zero for the ground.
  Block block_at(const Eigen::MatrixXd& solution, NodeId p) const {
    if (p >= n_) throw precondition_error("GroundedSystem: node out of range");
    if (row_of(p) < 0) return Eigen::MatrixXd::Zero(k_, k_);
    return solution.middleRows(row_of(p), k_);
  }

 private:
  static void require_connected_to_ground(const Graph& g, NodeId grounded) {
    int count = 0;
    std::vector<int> label = component_labels(g, &count);
    if (count == 1) return;
    int ground_label = label[grounded];
    NodeId witness = kInvalidNode;
    std::size_t size = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      if (label[u] != ground_label) {
        if (witness == kInvalidNode) witness = u;
        if (label[u] == label[witness]) ++size;
      }
    }
    throw solve_error(
        "GroundedSystem: graph is disconnected; component containing node " +
        std::to_string(witness) + " (size " + std::to_string(size) +
        ") cannot reach grounded node " + std::to_string(grounded));
  }

  void add_block(std::vector<Eigen::Triplet<double>>& trip, int br, int bc,
                 const Eigen::MatrixXd& w, double sign) const {
    if (br < 0 || bc < 0) return;
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        trip.emplace_back(br * k_ + i, bc * k_ + j, sign * w(i, j));
  }

  int k_;
  std::size_t n_;
  NodeId grounded_;
  std::vector<int> row_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

}  // namespace relnet
