#pragma once

#include <array>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relnet/laplacian.hpp"
#include "relnet/network.hpp"
#include "relnet/spd.hpp"
#include "relnet/types.hpp"

namespace relnet {

/// Node potentials and edge currents for an identity-intensity flow: current
/// I_k enters at source and leaves at sink. Column j of every block belongs
/// to the j-th injected unit intensity.
struct TwoPointFlow {
  NodeId source = 0;
  NodeId sink = 0;
  std::vector<Eigen::MatrixXd> potential;  // per node, k x k, sink at zero
  std::vector<Eigen::MatrixXd> current;    // per edge, k x k, oriented tail -> head
  Block r_eff;                             // potential at the source
};

/// Generalized effective resistance between u and v: ground v, inject the
/// identity intensity at u, read the potential block at u.
inline Block effective_resistance(const GeneralizedNetwork& net, NodeId u, NodeId v) {
  if (u >= net.graph.num_nodes() || v >= net.graph.num_nodes())
    throw precondition_error("effective_resistance: node out of range");
  if (u == v) return Eigen::MatrixXd::Zero(net.k, net.k);
  GroundedSystem sys(net.graph, net.k, net.resistance, v);
  Block r = sys.block_at(sys.node_columns(u), u);
  return 0.5 * (r + r.transpose());
}

/// Full potential/current solution of the two-point flow problem.
inline TwoPointFlow two_point_flow(const GeneralizedNetwork& net, NodeId u, NodeId v) {
  if (u == v) throw precondition_error("two_point_flow: source equals sink");
  GroundedSystem sys(net.graph, net.k, net.resistance, v);
  Eigen::MatrixXd sol = sys.node_columns(u);
  TwoPointFlow out;
  out.source = u;
  out.sink = v;
  out.potential.resize(net.graph.num_nodes());
  for (NodeId p = 0; p < net.graph.num_nodes(); ++p)
    out.potential[p] = sys.block_at(sol, p);
  out.current.resize(net.graph.num_edges());
  for (std::size_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(net.resistance[e]);
    out.current[e] = ldlt.solve(out.potential[ed.tail] - out.potential[ed.head]);
  }
  out.r_eff = out.potential[u];
  return out;
}

struct KclReport {
  bool ok = false;
  double max_residual = 0.0;
  NodeId worst_node = kInvalidNode;
};

/// Matrix Kirchhoff current law: at every node the signed currents sum to
/// the injected intensity (+I at source, -I at sink, 0 elsewhere).
inline KclReport check_kcl(const GeneralizedNetwork& net, const TwoPointFlow& flow,
                           double tol = 1e-10) {
  KclReport out;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(net.k, net.k);
  for (NodeId p = 0; p < net.graph.num_nodes(); ++p) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(net.k, net.k);
    for (std::uint32_t ei : net.graph.incident(p)) {
      const Edge& ed = net.graph.edge(ei);
      if (ed.tail == p) acc += flow.current[ei];
      if (ed.head == p) acc -= flow.current[ei];
    }
    if (p == flow.source) acc -= eye;
    if (p == flow.sink) acc += eye;
    double r = acc.cwiseAbs().maxCoeff();
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_node = p;
    }
  }
  out.ok = out.max_residual <= tol;
  return out;
}

struct OhmReport {
  bool ok = false;
  double max_residual = 0.0;
  std::size_t worst_edge = 0;
};

/// Matrix Ohm law: R_e i_e equals the potential drop across every edge.
inline OhmReport check_ohm(const GeneralizedNetwork& net, const TwoPointFlow& flow,
                           double tol = 1e-10) {
  OhmReport out;
  for (std::size_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    Eigen::MatrixXd res = net.resistance[e] * flow.current[e] -
                          (flow.potential[ed.tail] - flow.potential[ed.head]);
    double r = res.cwiseAbs().maxCoeff();
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_edge = e;
    }
  }
  out.ok = out.max_residual <= tol;
  return out;
}

/// Pair effective resistances against one shared factorization. Grounds one
/// node, caches the solved inverse columns per requested node, and combines
/// them with R_eff(u,v) = M(u,u) + M(v,v) - M(u,v) - M(v,u).
class ResistanceSolver {
 public:
  explicit ResistanceSolver(const GeneralizedNetwork& net, NodeId ground = 0)
      : net_(net), sys_(net.graph, net.k, net.resistance, ground) {}

  const GeneralizedNetwork& net() const { return net_; }

  Block pair_resistance(NodeId u, NodeId v) {
    if (u >= net_.graph.num_nodes() || v >= net_.graph.num_nodes())
      throw precondition_error("pair_resistance: node out of range");
    const int k = net_.k;
    if (u == v) return Eigen::MatrixXd::Zero(k, k);
    Block muu = diag_block(u), mvv = diag_block(v);
    Block muv = cross_block(u, v);
    Block r = muu + mvv - muv - muv.transpose();
    return 0.5 * (r + r.transpose());
  }

  /// R_eff between u and the grounded node.
  Block grounded_block(NodeId u) { return diag_block(u); }

 private:
  const Eigen::MatrixXd& columns(NodeId u) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(u);
    if (it == cache_.end())
      it = cache_.emplace(u, sys_.node_columns(u)).first;
    return it->second;
  }

  Block diag_block(NodeId u) {
    if (sys_.row_of(u) < 0) return Eigen::MatrixXd::Zero(net_.k, net_.k);
    return sys_.block_at(columns(u), u);
  }

  Block cross_block(NodeId u, NodeId v) {
    if (sys_.row_of(u) < 0 || sys_.row_of(v) < 0)
      return Eigen::MatrixXd::Zero(net_.k, net_.k);
    return sys_.block_at(columns(v), u);
  }

  GeneralizedNetwork net_;
  GroundedSystem sys_;
  std::mutex mu_;
  std::map<NodeId, Eigen::MatrixXd> cache_;
};

struct PairComparison {
  NodeId u = 0;
  NodeId v = 0;
  double slack = 0.0;  // smallest eigenvalue of (upper bound - lower bound)
  bool ok = false;
};

struct LawReport {
  std::string law;
  bool ok = false;
  double min_slack = 0.0;
  std::vector<PairComparison> pairs;
  std::vector<PairComparison> violations() const {
    std::vector<PairComparison> out;
    for (const auto& p : pairs)
      if (!p.ok) out.push_back(p);
    return out;
  }
};

namespace detail {

inline double law_slack(const std::vector<Block>& blocks) {
  double scale = 1.0;
  for (const auto& b : blocks) scale = std::max(scale, sym_norm(b));
  return kPsdSlack * scale;
}

inline void require_constant_resistance(const GeneralizedNetwork& net, const char* what) {
  for (std::size_t e = 1; e < net.resistance.size(); ++e)
    if (!net.resistance[e].isApprox(net.resistance[0], 1e-12))
      throw precondition_error(std::string(what) +
                               ": requires a constant-resistance network");
}

}  // namespace detail

/// Rayleigh monotonicity: with `sub` embedded in `super` and every image
/// resistance dominated by its preimage, effective resistances can only
/// shrink. Checks the PSD inequality on the given pairs of sub nodes.
inline LawReport check_rayleigh(const GeneralizedNetwork& sub,
                                const GeneralizedNetwork& super,
                                const Embedding& emb,
                                const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  EmbeddingCheck chk = verify_embedding(emb, sub.graph, super.graph);
  if (!chk.ok) throw precondition_error("check_rayleigh: embedding does not verify");
  double slack = detail::law_slack(sub.resistance);
  for (std::size_t e = 0; e < sub.graph.num_edges(); ++e) {
    const Edge& ed = sub.graph.edge(e);
    auto img = super.graph.find_edge(emb.map[ed.tail], emb.map[ed.head]);
    if (!img || !psd_less_equal(super.resistance[*img], sub.resistance[e], slack))
      throw precondition_error("check_rayleigh: image resistance of edge " +
                               std::to_string(e) + " is not dominated");
  }
  LawReport out;
  out.law = "rayleigh";
  ResistanceSolver rs_sub(sub), rs_super(super);
  out.ok = true;
  bool first = true;
  for (auto [u, v] : pairs) {
    Block a = rs_sub.pair_resistance(u, v);
    Block b = rs_super.pair_resistance(emb.map[u], emb.map[v]);
    PairComparison pc;
    pc.u = u;
    pc.v = v;
    pc.slack = min_eigenvalue(a - b);
    pc.ok = pc.slack >= -slack;
    out.pairs.push_back(pc);
    out.min_slack = first ? pc.slack : std::min(out.min_slack, pc.slack);
    first = false;
    out.ok = out.ok && pc.ok;
  }
  return out;
}

/// Triangle inequality of effective resistance for constant-resistance
/// networks: R_eff(u,w) <= R_eff(u,v) + R_eff(v,w) in the PSD order.
inline LawReport check_triangle(const GeneralizedNetwork& net,
                                const std::vector<std::array<NodeId, 3>>& triples) {
  detail::require_constant_resistance(net, "check_triangle");
  double slack = detail::law_slack(net.resistance);
  LawReport out;
  out.law = "triangle";
  ResistanceSolver rs(net);
  out.ok = true;
  bool first = true;
  for (const auto& t : triples) {
    Block uv = rs.pair_resistance(t[0], t[1]);
    Block vw = rs.pair_resistance(t[1], t[2]);
    Block uw = rs.pair_resistance(t[0], t[2]);
    PairComparison pc;
    pc.u = t[0];
    pc.v = t[2];
    pc.slack = min_eigenvalue(uv + vw - uw);
    pc.ok = pc.slack >= -slack;
    out.pairs.push_back(pc);
    out.min_slack = first ? pc.slack : std::min(out.min_slack, pc.slack);
    first = false;
    out.ok = out.ok && pc.ok;
  }
  return out;
}

struct FuzzReport {
  int h = 1;
  /// Upper sandwich half: R_eff of the fuzzed network never exceeds the base.
  LawReport upper;
  /// Largest certified t with t * R_base <= R_fuzzed over the tested pairs.
  double alpha_hat = 0.0;
};

/// Sandwich between a constant-resistance network and its h-fuzz (same block
/// on every fuzz edge). When h = 1 the fuzz has the same edge set, the
/// networks are identical, and alpha is exactly one.
inline FuzzReport fuzz_sandwich(const GeneralizedNetwork& net, int h,
                                const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  detail::require_constant_resistance(net, "fuzz_sandwich");
  if (net.graph.num_edges() == 0)
    throw precondition_error("fuzz_sandwich: network has no edges");
  FuzzReport out;
  out.h = h;
  out.upper.law = "fuzz";
  Graph fuzzed = h_fuzz(net.graph, h);

  std::set<std::pair<NodeId, NodeId>> base_set, fuzz_set;
  for (const Edge& e : net.graph.edges()) {
    auto mm = std::minmax(e.tail, e.head);
    base_set.insert({mm.first, mm.second});
  }
  for (const Edge& e : fuzzed.edges()) fuzz_set.insert({e.tail, e.head});
  if (base_set == fuzz_set) {
    out.alpha_hat = 1.0;
    out.upper.ok = true;
    for (auto [u, v] : pairs)
      out.upper.pairs.push_back({u, v, 0.0, true});
    return out;
  }

  GeneralizedNetwork fuzz_net;
  fuzz_net.graph = fuzzed;
  fuzz_net.k = net.k;
  fuzz_net.resistance.assign(fuzzed.num_edges(), net.resistance.front());
  double slack = detail::law_slack(net.resistance);
  ResistanceSolver rs_base(net), rs_fuzz(fuzz_net);
  out.upper.ok = true;
  bool first = true;
  for (auto [u, v] : pairs) {
    Block rb = rs_base.pair_resistance(u, v);
    Block rf = rs_fuzz.pair_resistance(u, v);
    PairComparison pc;
    pc.u = u;
    pc.v = v;
    pc.slack = min_eigenvalue(rb - rf);
    pc.ok = pc.slack >= -slack;
    out.upper.pairs.push_back(pc);
    out.upper.min_slack = first ? pc.slack : std::min(out.upper.min_slack, pc.slack);
    out.upper.ok = out.upper.ok && pc.ok;
    double t = generalized_min_eig(rf, rb);
    out.alpha_hat = first ? t : std::min(out.alpha_hat, t);
    first = false;
  }
  return out;
}

struct PathBound {
  int hops = 0;
  Block bound;   // hops * R0
  Block r_eff;
  bool ok = false;  // r_eff <= bound within slack
};

/// Shortest-path upper bound on effective resistance in constant-resistance
/// networks: R_eff(u,v) <= d(u,v) * R0.
inline PathBound path_upper_bound(const GeneralizedNetwork& net, NodeId u, NodeId v) {
  detail::require_constant_resistance(net, "path_upper_bound");
  auto d = graphical_distance(net.graph, u, v);
  if (!d) throw precondition_error("path_upper_bound: nodes are not connected");
  PathBound out;
  out.hops = *d;
  out.bound = static_cast<double>(*d) * net.resistance.front();
  out.r_eff = effective_resistance(net, u, v);
  out.ok = psd_less_equal(out.r_eff, out.bound, detail::law_slack(net.resistance));
  return out;
}

}  // namespace relnet
