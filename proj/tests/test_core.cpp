#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "relnet/graph.hpp"
#include "relnet/netgen.hpp"
#include "relnet/network.hpp"

#include "common/oracles.hpp"
#include "common/random_nets.hpp"

using namespace relnet;

namespace {

std::set<std::pair<NodeId, NodeId>> edge_set(const Graph& g) {
  std::set<std::pair<NodeId, NodeId>> s;
  for (const Edge& e : g.edges()) {
    auto mm = std::minmax(e.tail, e.head);
    s.insert({mm.first, mm.second});
  }
  return s;
}

}  // namespace

TEST_CASE("builder rejects malformed graphs", "[core]") {
  GraphBuilder b(3);
  CHECK_THROWS_AS(b.add_edge(0, 0), precondition_error);
  CHECK_THROWS_AS(b.add_edge(0, 3), precondition_error);

  GraphBuilder capped(3, 1);
  capped.add_edge(0, 1).add_edge(1, 2);
  CHECK_THROWS_AS(capped.build(), precondition_error);
}

TEST_CASE("graphical distance on the 2D lattice equals l1", "[core]") {
  LatticeBox box = gen_lattice(2, 4, 1);
  Eigen::VectorXi a(2), b(2);
  a << -3, 2;
  b << 4, -1;
  auto d = graphical_distance(box.graph, box.index_of(a), box.index_of(b));
  REQUIRE(d.has_value());
  CHECK(*d == 7 + 3);
  CHECK(*graphical_distance(box.graph, box.index_of(a), box.index_of(a)) == 0);
}

TEST_CASE("distance on two components is unreachable", "[core]") {
  GraphBuilder b(4);
  b.add_edge(0, 1).add_edge(2, 3);
  Graph g = b.build();
  CHECK_FALSE(graphical_distance(g, 0, 3).has_value());
  CHECK_FALSE(is_weakly_connected(g));
  CHECK(oracles::union_find_connected(g) == is_weakly_connected(g));
}

TEST_CASE("connectivity agrees with union-find on random graphs", "[core]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto net = fixtures::random_connected_network(seed, 12 + int(seed % 9), 1, int(seed % 5));
    CHECK(is_weakly_connected(net.graph));
    CHECK(oracles::union_find_connected(net.graph));
  }
}

TEST_CASE("direction is ignored by distance and connectivity", "[core]") {
  GraphBuilder b1(3), b2(3);
  b1.add_edge(0, 1).add_edge(1, 2);
  b2.add_edge(1, 0).add_edge(2, 1);
  CHECK(*graphical_distance(b1.build(), 0, 2) == 2);
  CHECK(*graphical_distance(b2.build(), 0, 2) == 2);
}

TEST_CASE("3-fuzz of the 1D lattice has interior degree six", "[core][fuzz]") {
  LatticeBox line = gen_lattice(1, 9, 1);
  Graph fz = h_fuzz(line.graph, 3);
  Eigen::VectorXi p(1);
  p << 0;
  CHECK(fz.degree(line.index_of(p)) == 6);
  // ceil(d/3) distances
  Eigen::VectorXi a(1), b(1);
  a << -9;
  for (int x = -8; x <= 9; ++x) {
    b << x;
    int d = *graphical_distance(fz, line.index_of(a), line.index_of(b));
    CHECK(d == (x + 9 + 2) / 3);
  }
}

TEST_CASE("fuzz composition collapses: (G^p)^l = G^(pl)", "[core][fuzz]") {
  LatticeBox box = gen_lattice(2, 4, 1);
  Graph p2 = h_fuzz(box.graph, 2);
  Graph p2_l2 = h_fuzz(p2, 2);
  Graph p4 = h_fuzz(box.graph, 4);
  CHECK(edge_set(p2_l2) == edge_set(p4));

  LatticeBox line = gen_lattice(1, 12, 1);
  CHECK(edge_set(h_fuzz(h_fuzz(line.graph, 3), 2)) == edge_set(h_fuzz(line.graph, 6)));
}

TEST_CASE("1-fuzz is the graph itself up to direction", "[core][fuzz]") {
  auto net = fixtures::random_connected_network(7, 15, 1, 6);
  CHECK(edge_set(h_fuzz(net.graph, 1)) == edge_set(net.graph));
}

TEST_CASE("fuzz edge rule matches direct l1 enumeration on boxes", "[core][fuzz]") {
  // box distance equals l1, so the fuzz must be the direct l1-offset graph
  LatticeBox base = gen_lattice(2, 3, 1);
  LatticeBox direct = gen_lattice(2, 3, 3);
  CHECK(edge_set(h_fuzz(base.graph, 3)) == edge_set(direct.graph));
}

TEST_CASE("fuzz rejects parallel edges", "[core][fuzz]") {
  GraphBuilder b(2);
  b.add_edge(0, 1).add_edge(1, 0);
  Graph g = b.build();
  CHECK(g.has_parallel_edges());
  CHECK_THROWS_AS(h_fuzz(g, 2), precondition_error);
}

TEST_CASE("induced subgraph threads original ids", "[core]") {
  LatticeBox box = gen_lattice(1, 3, 1);  // nodes 0..6 for -3..3
  Graph sub = induced_subgraph(box.graph, {1, 2, 3});
  CHECK(sub.num_nodes() == 3);
  CHECK(sub.num_edges() == 2);
  CHECK(sub.original_id(0) == 1);
  CHECK(sub.original_id(2) == 3);
  Graph subsub = induced_subgraph(sub, {1, 2});
  CHECK(subsub.original_id(0) == 2);  // ids compose through extraction
}

TEST_CASE("verify_embedding checks injectivity and edge preservation", "[core]") {
  LatticeBox small = gen_lattice(2, 1, 1);
  LatticeBox big = gen_lattice(2, 2, 1);
  Embedding emb;
  emb.map.resize(small.graph.num_nodes());
  for (NodeId u = 0; u < small.graph.num_nodes(); ++u)
    emb.map[u] = big.index_of(small.point_of(u));
  auto chk = verify_embedding(emb, small.graph, big.graph);
  CHECK(chk.ok);

  // collapse two nodes -> collision
  Embedding bad = emb;
  bad.map[1] = bad.map[0];
  auto chk2 = verify_embedding(bad, small.graph, big.graph);
  CHECK_FALSE(chk2.ok);
  CHECK_FALSE(chk2.injective);
  CHECK_FALSE(chk2.collisions.empty());

  // map an edge to non-adjacent images -> unpreserved edge reported
  Embedding torn = emb;
  Eigen::VectorXi far(2);
  far << 2, 2;
  torn.map[0] = big.index_of(far);
  auto chk3 = verify_embedding(torn, small.graph, big.graph);
  CHECK_FALSE(chk3.ok);
  CHECK_FALSE(chk3.unpreserved_edges.empty());
}

TEST_CASE("embeddings ignore edge direction", "[core]") {
  GraphBuilder bsrc(2), bdst(2);
  bsrc.add_edge(0, 1);
  bdst.add_edge(1, 0);
  Embedding id;
  id.map = {0, 1};
  CHECK(verify_embedding(id, bsrc.build(), bdst.build()).ok);
}

TEST_CASE("merge_parallel combines bundles harmonically", "[core]") {
  GraphBuilder b(2);
  b.add_edge(0, 1).add_edge(0, 1).add_edge(1, 0);
  MeasurementNetwork net;
  net.graph = b.build();
  net.k = 1;
  net.covariance = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 3.0),
                    Eigen::MatrixXd::Constant(1, 1, 6.0)};
  MeasurementNetwork merged = merge_parallel(net);
  REQUIRE(merged.graph.num_edges() == 1);
  CHECK_FALSE(merged.graph.has_parallel_edges());
  CHECK(merged.covariance[0](0, 0) == Catch::Approx(oracles::parallel({2.0, 3.0, 6.0})));
}

TEST_CASE("merge_parallel preserves effective resistance", "[core]") {
  // triangle with one doubled side, matrix blocks
  GraphBuilder b(3);
  b.add_edge(0, 1).add_edge(1, 2).add_edge(2, 0).add_edge(1, 0);
  MeasurementNetwork net;
  net.graph = b.build();
  net.k = 2;
  std::mt19937_64 eng(99);
  for (int e = 0; e < 4; ++e) net.covariance.push_back(fixtures::random_spd(eng, 2));
  net.reference = 2;

  Eigen::MatrixXd before = oracles::dense_pinv_block(net.graph, 2, net.covariance, 0, 2);
  MeasurementNetwork merged = merge_parallel(net);
  Eigen::MatrixXd after = oracles::dense_pinv_block(merged.graph, 2, merged.covariance, 0, 2);
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(merged.graph.num_edges() == 3);
}

TEST_CASE("merge_parallel keeps untouched networks intact", "[core]") {
  auto net = fixtures::random_connected_network(3, 10, 2, 4);
  MeasurementNetwork merged = merge_parallel(net);
  CHECK(merged.graph.num_edges() == net.graph.num_edges());
  CHECK(edge_set(merged.graph) == edge_set(net.graph));
}

TEST_CASE("network validation catches broken invariants", "[core]") {
  auto net = fixtures::random_connected_network(11, 8, 2, 3);
  CHECK_NOTHROW(validate(net));

  auto bad_block = net;
  bad_block.covariance[0] = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(validate(bad_block), precondition_error);

  auto bad_ref = net;
  bad_ref.reference = static_cast<NodeId>(net.graph.num_nodes());
  CHECK_THROWS_AS(validate(bad_ref), precondition_error);
}

TEST_CASE("block bounds bracket every edge block", "[core]") {
  auto net = fixtures::random_connected_network(5, 9, 3, 4);
  BlockBounds bb = block_bounds(net);
  CHECK(bb.p_min > 0);
  CHECK(bb.p_min <= bb.p_max);
  for (const auto& c : net.covariance) {
    CHECK(min_eigenvalue(c) >= bb.p_min - 1e-12);
    CHECK(max_eigenvalue(c) <= bb.p_max + 1e-12);
  }
}
