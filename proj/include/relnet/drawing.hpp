#pragma once

#include <Eigen/Dense>

#include "relnet/types.hpp"

namespace relnet {

/// Node positions in R^dim, one row per node.
struct Drawing {
  int dim = 0;
  Eigen::MatrixXd coords;  // num_nodes x dim

  Eigen::VectorXd position(NodeId u) const { return coords.row(u).transpose(); }
  std::size_t num_nodes() const { return static_cast<std::size_t>(coords.rows()); }
};

/// Axis-aligned box, used as evaluation region and for nested subgraphs.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Eigen::VectorXd& p, double pad = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (p[i] < lo[i] - pad || p[i] > hi[i] + pad) return false;
    return true;
  }

  static Box bounding(const Drawing& f) {
    Box b;
    b.lo = f.coords.colwise().minCoeff().transpose();
    b.hi = f.coords.colwise().maxCoeff().transpose();
    return b;
  }

  /// Shrinks every side by t, collapsing to the midpoint when t is too large.
  Box shrunk(double t) const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] += t;
      b.hi[i] -= t;
      if (b.lo[i] > b.hi[i]) b.lo[i] = b.hi[i] = 0.5 * (lo[i] + hi[i]);
    }
    return b;
  }
};

}  // namespace relnet
