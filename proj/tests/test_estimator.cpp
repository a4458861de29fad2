#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "relnet/estimator.hpp"
#include "relnet/netgen.hpp"

#include "common/oracles.hpp"
#include "common/random_nets.hpp"

using namespace relnet;

namespace {

MeasurementNetwork path_network(const std::vector<Eigen::MatrixXd>& covs) {
  MeasurementNetwork net;
  GraphBuilder b(covs.size() + 1);
  for (std::size_t i = 0; i < covs.size(); ++i)
    b.add_edge(static_cast<NodeId>(i + 1), static_cast<NodeId>(i));
  net.graph = b.build();
  net.k = static_cast<int>(covs.front().rows());
  net.covariance = covs;
  net.reference = 0;
  return net;
}

MeasurementNetwork lattice_network(int dim, int m, int k, const Eigen::MatrixXd& p,
                                   NodeId reference) {
  LatticeBox box = gen_lattice(dim, m, 1);
  MeasurementNetwork net;
  net.graph = box.graph;
  net.k = k;
  net.covariance.assign(net.graph.num_edges(), p);
  net.reference = reference;
  return net;
}

}  // namespace

TEST_CASE("covariance along a path is the sum of edge covariances", "[estimator]") {
  SECTION("scalar") {
    auto net = path_network({Eigen::MatrixXd::Constant(1, 1, 0.7),
                             Eigen::MatrixXd::Constant(1, 1, 1.9)});
    auto sig = blue_covariance(net, {2});
    CHECK(sig[0](0, 0) == Catch::Approx(2.6).epsilon(1e-12));
  }
  SECTION("matrix blocks") {
    std::mt19937_64 eng(5);
    Eigen::MatrixXd p1 = fixtures::random_spd(eng, 3), p2 = fixtures::random_spd(eng, 3);
    auto net = path_network({p1, p2});
    auto sig = blue_covariance(net, {2});
    CHECK((sig[0] - (p1 + p2)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("covariance matches the dense pseudo-inverse oracle", "[estimator]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    int k = 1 + static_cast<int>(seed % 3);
    auto net = fixtures::random_connected_network(seed * 31 + 1, 14, k, 8);
    NodeId target = static_cast<NodeId>(1 + seed % (net.graph.num_nodes() - 1));
    auto sig = blue_covariance(net, {target});
    auto oracle = oracles::dense_pinv_block(net.graph, k, net.covariance, target,
                                            net.reference);
    CHECK((sig[0] - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("reference block is zero and off-reference blocks are SPD", "[estimator]") {
  auto net = fixtures::random_connected_network(77, 12, 2, 5);
  auto sig = blue_covariance(net, {net.reference, 3, 7});
  CHECK(sig[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(is_spd(sig[1]));
  CHECK(is_spd(sig[2]));
}

TEST_CASE("estimates reproduce the truth from consistent measurements", "[estimator]") {
  auto net = fixtures::random_connected_network(13, 16, 2, 10);
  std::mt19937_64 eng(42);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<Eigen::VectorXd> truth(net.graph.num_nodes());
  for (auto& x : truth) {
    x.resize(2);
    x << n01(eng), n01(eng);
  }
  for (auto& x : truth) x -= truth[net.reference];
  net.measurements.resize(net.graph.num_edges());
  for (std::size_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    net.measurements[e] = truth[ed.tail] - truth[ed.head];
  }
  auto est = blue_solve(net);
  CHECK(est[net.reference].cwiseAbs().maxCoeff() == 0.0);
  for (NodeId u = 0; u < net.graph.num_nodes(); ++u)
    CHECK((est[u] - truth[u]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("estimates are invariant under edge flips with negated data", "[estimator]") {
  auto net = fixtures::random_connected_network(23, 10, 1, 4);
  std::mt19937_64 eng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  net.measurements.resize(net.graph.num_edges());
  for (auto& z : net.measurements) {
    z.resize(1);
    z << n01(eng);
  }
  MeasurementNetwork flipped = net;
  GraphBuilder b(net.graph.num_nodes());
  for (std::size_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    if (e % 2 == 0) {
      b.add_edge(ed.head, ed.tail);
      flipped.measurements[e] = -net.measurements[e];
    } else {
      b.add_edge(ed.tail, ed.head);
    }
  }
  flipped.graph = b.build();
  auto est = blue_solve(net);
  auto est2 = blue_solve(flipped);
  for (NodeId u = 0; u < net.graph.num_nodes(); ++u)
    CHECK((est[u] - est2[u]).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("disconnected networks fail with a named component", "[estimator]") {
  GraphBuilder b(5);
  b.add_edge(0, 1).add_edge(1, 2).add_edge(3, 4);
  MeasurementNetwork net;
  net.graph = b.build();
  net.k = 1;
  net.covariance.assign(3, Eigen::MatrixXd::Identity(1, 1));
  net.reference = 0;
  try {
    GroundedSystem sys(net.graph, net.k, net.covariance, net.reference);
    FAIL("expected solve_error");
  } catch (const solve_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("node 3") != std::string::npos);
    CHECK(msg.find("size 2") != std::string::npos);
  }
}

TEST_CASE("monte carlo covariance agrees with the closed form", "[estimator][slow]") {
  auto net = fixtures::random_connected_network(7, 9, 2, 5);
  NodeId target = 4;
  auto sig = blue_covariance(net, {target})[0];
  std::vector<Eigen::LLT<Eigen::MatrixXd>> chol;
  for (const auto& c : net.covariance) chol.emplace_back(c);

  const int trials = 20000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (int t = 0; t < trials; ++t) {
    MeasurementNetwork draw = net;
    draw.measurements.resize(net.graph.num_edges());
    std::mt19937_64 eng = seeded_engine(1234, t);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (std::size_t e = 0; e < net.graph.num_edges(); ++e) {
      Eigen::VectorXd w(2);
      w << n01(eng), n01(eng);
      draw.measurements[e] = Eigen::MatrixXd(chol[e].matrixL()) * w;  // truth = 0
    }
    Eigen::VectorXd err = blue_solve(draw)[target];
    mean += err;
    acc += err * err.transpose();
  }
  mean /= trials;
  Eigen::MatrixXd emp = acc / trials;
  // unbiased within 4 standard errors; covariance within 15 percent
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(mean[i]) <= 4.0 * std::sqrt(sig(i, i) / trials));
  CHECK((emp - sig).cwiseAbs().maxCoeff() < 0.15 * sig.cwiseAbs().maxCoeff());
}

TEST_CASE("1D covariance grows exactly linearly in the distance", "[estimator]") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(1, 1, 1.3);
  auto net = lattice_network(1, 10, 1, p, 10);  // reference at coordinate 0
  LatticeBox box = gen_lattice(1, 10, 1);
  std::vector<NodeId> targets;
  Eigen::VectorXi q(1);
  for (int d = 1; d <= 6; ++d) {
    q << d;
    targets.push_back(box.index_of(q));
  }
  auto sig = blue_covariance(net, targets);
  for (int d = 1; d <= 6; ++d)
    CHECK(sig[d - 1](0, 0) == Catch::Approx(1.3 * d).epsilon(1e-10));
}

TEST_CASE("nested boxes give PSD-monotone covariances", "[estimator]") {
  // 2D lattice boxes of half width 2, 4, 6; u at (1,0), o at (0,0)
  NestedSequence seq;
  std::vector<int> widths = {2, 4, 6};
  Eigen::MatrixXd p(2, 2);
  p << 1.0, 0.2, 0.2, 0.8;
  std::vector<LatticeBox> boxes;
  for (int m : widths) {
    LatticeBox box = gen_lattice(2, m, 1);
    NestedLevel lvl;
    lvl.net.graph = box.graph;
    lvl.net.k = 2;
    lvl.net.covariance.assign(box.graph.num_edges(), p);
    Eigen::VectorXi pu(2), po(2);
    pu << 1, 0;
    po << 0, 0;
    lvl.u = box.index_of(pu);
    lvl.o = box.index_of(po);
    seq.levels.push_back(std::move(lvl));
    boxes.push_back(std::move(box));
  }
  for (std::size_t i = 0; i + 1 < boxes.size(); ++i) {
    Embedding emb;
    emb.map.resize(boxes[i].graph.num_nodes());
    for (NodeId u = 0; u < boxes[i].graph.num_nodes(); ++u)
      emb.map[u] = boxes[i + 1].index_of(boxes[i].point_of(u));
    seq.inclusion.push_back(std::move(emb));
  }
  auto report = nested_convergence(seq);
  CHECK(report.monotone);
  CHECK(report.worst_violation >= -1e-10);
  // strictly more information in the larger box
  CHECK(min_eigenvalue(report.sigma.front() - report.sigma.back()) > 1e-6);
}

TEST_CASE("nested sequence validation rejects broken inclusions", "[estimator]") {
  NestedSequence seq;
  for (int m : {1, 2}) {
    LatticeBox box = gen_lattice(1, m, 1);
    NestedLevel lvl;
    lvl.net.graph = box.graph;
    lvl.net.k = 1;
    lvl.net.covariance.assign(box.graph.num_edges(), Eigen::MatrixXd::Identity(1, 1));
    Eigen::VectorXi pu(1), po(1);
    pu << 1;
    po << 0;
    lvl.u = box.index_of(pu);
    lvl.o = box.index_of(po);
    seq.levels.push_back(std::move(lvl));
  }
  Embedding wrong;
  wrong.map.assign(3, 0);  // collapses everything
  seq.inclusion.push_back(wrong);
  CHECK_THROWS_AS(nested_convergence(seq), precondition_error);
}
