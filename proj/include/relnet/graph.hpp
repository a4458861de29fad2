#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "relnet/types.hpp"

namespace relnet {

inline constexpr std::size_t kDefaultMaxDegree = 64;

/// Directed edge; direction carries measurement sign only. Distances,
/// connectivity and resistance ignore it.
struct Edge {
  NodeId tail = kInvalidNode;
  NodeId head = kInvalidNode;
};

/// Immutable multigraph over dense node ids [0, n). Build with GraphBuilder.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const Edge& edge(std::size_t i) const { return edges_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Indices of edges incident to u (either endpoint).
  const std::vector<std::uint32_t>& incident(NodeId u) const { return incident_[u]; }

  std::size_t degree(NodeId u) const { return incident_[u].size(); }

  NodeId opposite(std::size_t edge_idx, NodeId u) const {
    const Edge& e = edges_[edge_idx];
    return e.tail == u ? e.head : e.tail;
  }

  /// Any edge joining u and v regardless of direction.
  std::optional<std::size_t> find_edge(NodeId u, NodeId v) const {
    for (std::uint32_t i : incident_[u]) {
      const Edge& e = edges_[i];
      if ((e.tail == u && e.head == v) || (e.tail == v && e.head == u)) return i;
    }
    return std::nullopt;
  }

  bool has_parallel_edges() const {
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const Edge& e : edges_) {
      auto key = std::minmax(e.tail, e.head);
      if (!seen.insert({key.first, key.second}).second) return true;
    }
    return false;
  }

  /// Original ids survive subgraph extraction; identity when never remapped.
  bool has_original_ids() const { return !original_ids_.empty(); }
  std::uint64_t original_id(NodeId u) const {
    return has_original_ids() ? original_ids_[u] : u;
  }
  const std::vector<std::uint64_t>& original_ids() const { return original_ids_; }

 private:
  friend class GraphBuilder;
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> incident_;
  std::vector<std::uint64_t> original_ids_;
};

/// Builder with validation: ids in range, no self-loops, degree cap.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::size_t num_nodes,
                        std::size_t max_degree = kDefaultMaxDegree)
      : n_(num_nodes), max_degree_(max_degree) {}

  GraphBuilder& add_edge(NodeId tail, NodeId head) {
    if (tail >= n_ || head >= n_)
      throw precondition_error("GraphBuilder: edge endpoint out of range");
    if (tail == head)
      throw precondition_error("GraphBuilder: self-loops are not allowed");
    edges_.push_back({tail, head});
    return *this;
  }

  GraphBuilder& set_original_ids(std::vector<std::uint64_t> ids) {
    if (ids.size() != n_)
      throw precondition_error("GraphBuilder: original id table size mismatch");
    original_ids_ = std::move(ids);
    return *this;
  }

  std::size_t num_edges() const { return edges_.size(); }

  Graph build() {
    Graph g;
    g.n_ = n_;
    g.edges_ = std::move(edges_);
    g.original_ids_ = std::move(original_ids_);
    g.incident_.assign(n_, {});
    for (std::uint32_t i = 0; i < g.edges_.size(); ++i) {
      g.incident_[g.edges_[i].tail].push_back(i);
      g.incident_[g.edges_[i].head].push_back(i);
    }
    for (NodeId u = 0; u < n_; ++u) {
      if (g.incident_[u].size() > max_degree_)
        throw precondition_error("GraphBuilder: node " + std::to_string(u) +
                                 " exceeds max degree " + std::to_string(max_degree_));
    }
    return g;
  }

 private:
  std::size_t n_;
  std::size_t max_degree_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> original_ids_;
};

/// Hop distances from src ignoring edge direction; -1 marks unreachable.
/// A non-negative depth_cap truncates the search at that depth.
inline std::vector<int> bfs_distances(const Graph& g, NodeId src, int depth_cap = -1) {
  std::vector<int> dist(g.num_nodes(), -1);
  if (src >= g.num_nodes()) throw precondition_error("bfs_distances: bad source");
  std::deque<NodeId> q;
  dist[src] = 0;
  q.push_back(src);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    if (depth_cap >= 0 && dist[u] >= depth_cap) continue;
    for (std::uint32_t ei : g.incident(u)) {
      NodeId v = g.opposite(ei, u);
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist;
}

/// Graphical distance between u and v; nullopt when unreachable.
inline std::optional<int> graphical_distance(const Graph& g, NodeId u, NodeId v) {
  if (u >= g.num_nodes() || v >= g.num_nodes())
    throw precondition_error("graphical_distance: node out of range");
  if (u == v) return 0;
  std::vector<int> d = bfs_distances(g, u);
  if (d[v] < 0) return std::nullopt;
  return d[v];
}

/// Weak-connectivity component label per node; labels are 0..count-1 in
/// order of smallest contained node id.
inline std::vector<int> component_labels(const Graph& g, int* count = nullptr) {
  std::vector<int> label(g.num_nodes(), -1);
  int next = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    std::deque<NodeId> q{s};
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      for (std::uint32_t ei : g.incident(u)) {
        NodeId v = g.opposite(ei, u);
        if (label[v] < 0) {
          label[v] = next;
          q.push_back(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

inline bool is_weakly_connected(const Graph& g) {
  if (g.num_nodes() == 0) return true;
  int count = 0;
  component_labels(g, &count);
  return count == 1;
}

/// h-fuzz: same nodes, one canonical edge (u -> v, u < v) for every pair at
/// graphical distance between 1 and h. Requires a parallel-free input.
inline Graph h_fuzz(const Graph& g, int h) {
  if (h < 1) throw precondition_error("h_fuzz: h must be >= 1");
  if (g.has_parallel_edges())
    throw precondition_error("h_fuzz: input has parallel edges");
  GraphBuilder b(g.num_nodes(), static_cast<std::size_t>(-1));
  if (g.has_original_ids()) b.set_original_ids(g.original_ids());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    std::vector<int> d = bfs_distances(g, u, h);
    for (NodeId v = u + 1; v < g.num_nodes(); ++v)
      if (d[v] >= 1) b.add_edge(u, v);
  }
  return b.build();
}

/// Induced subgraph on `keep` (strictly increasing node ids). New ids follow
/// the order of `keep`; original ids are threaded through.
inline Graph induced_subgraph(const Graph& g, const std::vector<NodeId>& keep) {
  std::vector<NodeId> remap(g.num_nodes(), kInvalidNode);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= g.num_nodes())
      throw precondition_error("induced_subgraph: node out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw precondition_error("induced_subgraph: keep list must be strictly increasing");
    remap[keep[i]] = static_cast<NodeId>(i);
  }
  GraphBuilder b(keep.size(), static_cast<std::size_t>(-1));
  std::vector<std::uint64_t> orig(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) orig[i] = g.original_id(keep[i]);
  b.set_original_ids(std::move(orig));
  for (const Edge& e : g.edges()) {
    NodeId t = remap[e.tail], h = remap[e.head];
    if (t != kInvalidNode && h != kInvalidNode) b.add_edge(t, h);
  }
  return b.build();
}

/// Node map from a source graph into a target graph.
struct Embedding {
  std::vector<NodeId> map;  // source node -> target node

  NodeId operator()(NodeId u) const { return map[u]; }
};

struct EmbeddingCheck {
  bool ok = false;
  bool injective = false;
  /// Pairs of source nodes sharing an image.
  std::vector<std::pair<NodeId, NodeId>> collisions;
  /// Source edge indices whose endpoint images are not adjacent in the target.
  std::vector<std::uint32_t> unpreserved_edges;
};

/// Checks injectivity and edge preservation up to direction.
inline EmbeddingCheck verify_embedding(const Embedding& emb, const Graph& src,
                                       const Graph& dst) {
  EmbeddingCheck out;
  if (emb.map.size() != src.num_nodes())
    throw precondition_error("verify_embedding: map size mismatch");
  std::vector<NodeId> owner(dst.num_nodes(), kInvalidNode);
  out.injective = true;
  for (NodeId u = 0; u < src.num_nodes(); ++u) {
    NodeId img = emb.map[u];
    if (img >= dst.num_nodes())
      throw precondition_error("verify_embedding: image node out of range");
    if (owner[img] != kInvalidNode) {
      out.injective = false;
      out.collisions.push_back({owner[img], u});
    } else {
      owner[img] = u;
    }
  }
  for (std::uint32_t i = 0; i < src.num_edges(); ++i) {
    const Edge& e = src.edge(i);
    if (!dst.find_edge(emb.map[e.tail], emb.map[e.head]))
      out.unpreserved_edges.push_back(i);
  }
  out.ok = out.injective && out.unpreserved_edges.empty();
  return out;
}

}  // namespace relnet
