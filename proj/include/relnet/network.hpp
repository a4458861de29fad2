#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relnet/graph.hpp"
#include "relnet/spd.hpp"
#include "relnet/types.hpp"

namespace relnet {

/// Extremal eigenvalue bounds over all edge blocks: p_min*I <= P_e <= p_max*I.
struct BlockBounds {
  double p_min = 0.0;
  double p_max = 0.0;
};

/// Relative-measurement network: a graph whose edges carry k x k SPD error
/// covariances, one reference node, and optionally one measurement per edge.
/// Edge (u, v) measures x_u - x_v plus zero-mean noise.
struct MeasurementNetwork {
  Graph graph;
  int k = 1;
  std::vector<Block> covariance;            // one SPD block per edge
  NodeId reference = 0;
  std::vector<Eigen::VectorXd> measurements;  // empty, or one k-vector per edge

  bool has_measurements() const { return !measurements.empty(); }
};

/// Generalized electrical network: same carrier with blocks read as matrix
/// resistances. The two views coincide object-for-object.
struct GeneralizedNetwork {
  Graph graph;
  int k = 1;
  std::vector<Block> resistance;
};

inline GeneralizedNetwork as_electrical(const MeasurementNetwork& net) {
  return GeneralizedNetwork{net.graph, net.k, net.covariance};
}

inline MeasurementNetwork as_measurement(const GeneralizedNetwork& net,
                                         NodeId reference = 0) {
  return MeasurementNetwork{net.graph, net.k, net.resistance, reference, {}};
}

namespace detail {

inline void validate_blocks(const Graph& g, int k, const std::vector<Block>& blocks,
                            const char* what) {
  if (k < 1) throw precondition_error(std::string(what) + ": k must be >= 1");
  if (blocks.size() != g.num_edges())
    throw precondition_error(std::string(what) + ": one block per edge required");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != k || blocks[i].cols() != k)
      throw precondition_error(std::string(what) + ": block " + std::to_string(i) +
                               " is not k x k");
    SpdCheck c = check_spd(blocks[i]);
    if (!c.ok)
      throw precondition_error(std::string(what) + ": block " + std::to_string(i) +
                               " rejected (" + c.reason + ")");
  }
}

}  // namespace detail

/// Full invariant check: SPD blocks, reference in range, weak connectivity,
/// no parallel edges, measurement shape.
inline void validate(const MeasurementNetwork& net) {
  detail::validate_blocks(net.graph, net.k, net.covariance, "MeasurementNetwork");
  if (net.reference >= net.graph.num_nodes())
    throw precondition_error("MeasurementNetwork: reference node out of range");
  if (!is_weakly_connected(net.graph))
    throw precondition_error("MeasurementNetwork: graph is not weakly connected");
  if (net.graph.has_parallel_edges())
    throw precondition_error("MeasurementNetwork: parallel edges present; merge them first");
  if (net.has_measurements()) {
    if (net.measurements.size() != net.graph.num_edges())
      throw precondition_error("MeasurementNetwork: one measurement per edge required");
    for (const auto& z : net.measurements)
      if (z.size() != net.k)
        throw precondition_error("MeasurementNetwork: measurement dimension mismatch");
  }
}

inline void validate(const GeneralizedNetwork& net) {
  detail::validate_blocks(net.graph, net.k, net.resistance, "GeneralizedNetwork");
}

inline BlockBounds block_bounds(const std::vector<Block>& blocks) {
  BlockBounds out;
  bool first = true;
  for (const auto& b : blocks) {
    double lo = min_eigenvalue(b), hi = max_eigenvalue(b);
    if (first) {
      out.p_min = lo;
      out.p_max = hi;
      first = false;
    } else {
      out.p_min = std::min(out.p_min, lo);
      out.p_max = std::max(out.p_max, hi);
    }
  }
  return out;
}

inline BlockBounds block_bounds(const MeasurementNetwork& net) {
  return block_bounds(net.covariance);
}

inline BlockBounds block_bounds(const GeneralizedNetwork& net) {
  return block_bounds(net.resistance);
}

/// Replaces every parallel bundle by a single edge whose block is the
/// inverse of the summed block inverses. Edge order follows the first
/// appearance of each unordered pair; direction follows the first edge in
/// the bundle. Effective resistances are preserved. Measurements, having no
/// single-edge equivalent, are dropped when any merge happens.
inline MeasurementNetwork merge_parallel(const MeasurementNetwork& net) {
  detail::validate_blocks(net.graph, net.k, net.covariance, "merge_parallel");
  std::map<std::pair<NodeId, NodeId>, std::vector<std::size_t>> bundles;
  std::vector<std::pair<NodeId, NodeId>> order;
  for (std::size_t i = 0; i < net.graph.num_edges(); ++i) {
    const Edge& e = net.graph.edge(i);
    auto mm = std::minmax(e.tail, e.head);
    auto key = std::make_pair(mm.first, mm.second);
    auto [it, inserted] = bundles.try_emplace(key);
    it->second.push_back(i);
    if (inserted) order.push_back(key);
  }
  bool merged_any = false;
  GraphBuilder b(net.graph.num_nodes(), static_cast<std::size_t>(-1));
  if (net.graph.has_original_ids()) b.set_original_ids(net.graph.original_ids());
  std::vector<Block> blocks;
  blocks.reserve(order.size());
  for (const auto& key : order) {
    const auto& idx = bundles[key];
    const Edge& lead = net.graph.edge(idx.front());
    b.add_edge(lead.tail, lead.head);
    if (idx.size() == 1) {
      blocks.push_back(net.covariance[idx.front()]);
    } else {
      merged_any = true;
      std::vector<Block> bundle;
      for (std::size_t i : idx) bundle.push_back(net.covariance[i]);
      blocks.push_back(parallel_combine(bundle));
    }
  }
  MeasurementNetwork out;
  out.graph = b.build();
  out.k = net.k;
  out.covariance = std::move(blocks);
  out.reference = net.reference;
  if (!merged_any) out.measurements = net.measurements;
  return out;
}

}  // namespace relnet
