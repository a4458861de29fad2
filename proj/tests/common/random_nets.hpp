#pragma once

// Seeded random fixtures shared by the unit and acceptance suites.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "relnet/network.hpp"
#include "relnet/rng.hpp"

namespace fixtures {

/// Random SPD block with eigenvalues in roughly [0.3, 3].
inline Eigen::MatrixXd random_spd(std::mt19937_64& eng, int k) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd b(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) b(i, j) = n01(eng);
  Eigen::MatrixXd s = b * b.transpose() / k + 0.3 * Eigen::MatrixXd::Identity(k, k);
  return s;
}

/// Connected random network: random spanning tree plus extra random edges,
/// random SPD covariance per edge, no parallel edges, reference 0.
inline relnet::MeasurementNetwork random_connected_network(std::uint64_t seed, int n,
                                                          int k, int extra_edges) {
  std::mt19937_64 eng = relnet::seeded_engine(seed, 0xabcdu);
  std::vector<relnet::NodeId> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), eng);
  relnet::GraphBuilder b(n);
  std::set<std::pair<relnet::NodeId, relnet::NodeId>> used;
  auto add = [&](relnet::NodeId u, relnet::NodeId v) {
    auto mm = std::minmax(u, v);
    if (u == v || !used.insert({mm.first, mm.second}).second) return false;
    std::uniform_int_distribution<int> flip(0, 1);
    if (flip(eng)) b.add_edge(u, v);
    else b.add_edge(v, u);
    return true;
  };
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    add(order[i], order[pick(eng)]);
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  int added = 0, attempts = 0;
  while (added < extra_edges && attempts < 50 * (extra_edges + 1)) {
    ++attempts;
    if (add(pick(eng), pick(eng))) ++added;
  }
  relnet::MeasurementNetwork net;
  net.graph = b.build();
  net.k = k;
  net.covariance.reserve(net.graph.num_edges());
  for (std::size_t e = 0; e < net.graph.num_edges(); ++e)
    net.covariance.push_back(random_spd(eng, k));
  net.reference = 0;
  return net;
}

}  // namespace fixtures
