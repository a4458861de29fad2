#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relnet/relnet.hpp"

using namespace relnet;
namespace fs = std::filesystem;

namespace {

MeasurementNetwork identity_network(const Graph& g, int k, double variance) {
  MeasurementNetwork net;
  net.graph = g;
  net.k = k;
  net.covariance.assign(g.num_edges(), variance * Block::Identity(k, k));
  return net;
}

NodeId nearest_to_center(const Drawing& f) {
  Box box = Box::bounding(f);
  Eigen::VectorXd c = (box.lo + box.hi) / 2.0;
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId u = 0; u < f.num_nodes(); ++u) {
    double d = (f.position(u) - c).norm();
    if (d < best_d) {
      best_d = d;
      best = u;
    }
  }
  return best;
}

std::vector<std::pair<NodeId, NodeId>> sample_pairs(std::size_t n, std::size_t count,
                                                    std::uint64_t seed) {
  if (n < 2) throw precondition_error("need at least two nodes to sample pairs");
  std::mt19937_64 eng = seeded_engine(seed, 0x70616972);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t tries = 0; out.size() < count && tries < 50 * count + 100; ++tries) {
    NodeId u = pick(eng), v = pick(eng);
    if (u == v) continue;
    auto key = std::minmax(u, v);
    if (seen.insert({key.first, key.second}).second) out.push_back({u, v});
  }
  return out;
}

std::vector<std::array<NodeId, 3>> sample_triples(std::size_t n, std::size_t count,
                                                  std::uint64_t seed) {
  if (n < 3) throw precondition_error("need at least three nodes to sample triples");
  std::mt19937_64 eng = seeded_engine(seed, 0x74726970);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::vector<std::array<NodeId, 3>> out;
  while (out.size() < count) {
    NodeId u = pick(eng), v = pick(eng), w = pick(eng);
    if (u == v || v == w || u == w) continue;
    out.push_back({u, v, w});
  }
  return out;
}

void emit_json(const nlohmann::ordered_json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    detail::write_text(out_path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOpts {
  std::string family;
  std::string json_out, drawing_out;
  std::uint64_t seed = 0;
  int k = 1;
  double variance = 1.0;
  int dim = 2, half_width = 8, fuzz = 1;
  int rows = 10, cols = 10;
  int branching = 2, depth = 5;
  int points = 50;
  double extent = 10.0, range = 1.5;
  double alpha = 0.04, beta = 5.0, fail_probability = 0.0;
};

int cmd_gen(const GenOpts& o) {
  if (o.json_out.empty() && o.drawing_out.empty())
    throw precondition_error("gen: pass --json and/or --drawing");
  DrawnGraph dg;
  if (o.family == "lattice") {
    LatticeBox box = gen_lattice(o.dim, o.half_width, o.fuzz);
    dg = {std::move(box.graph), std::move(box.drawing)};
  } else if (o.family == "tri") {
    dg = gen_triangular(o.rows, o.cols);
  } else if (o.family == "geometric") {
    Box box;
    box.lo = Eigen::VectorXd::Zero(o.dim);
    box.hi = Eigen::VectorXd::Constant(o.dim, o.extent);
    dg = gen_geometric(random_points(o.points, box, o.seed), o.range);
  } else if (o.family == "failed-lattice") {
    FailureSpec spec;
    spec.alpha = o.alpha;
    spec.beta = o.beta;
    spec.fail_probability = o.fail_probability;
    FailedLattice fl = gen_failed_lattice(o.half_width, spec, o.seed);
    dg = {std::move(fl.giant), std::move(fl.giant_drawing)};
  } else {
    dg = gen_regular_tree(o.branching, o.depth);
  }
  if (!o.json_out.empty())
    save_network_json(identity_network(dg.graph, o.k, o.variance), o.json_out);
  if (!o.drawing_out.empty()) save_drawing_csv(dg.drawing, o.drawing_out);
  std::cout << "family " << o.family << ": " << dg.graph.num_nodes() << " nodes, "
            << dg.graph.num_edges() << " edges\n";
  return 0;
}

// ---------------------------------------------------------------------------
// blue
// ---------------------------------------------------------------------------

struct BlueOpts {
  std::string graph, out, measurements, estimates;
  NodeId ref = 0;
  std::vector<NodeId> targets;
};

int cmd_blue(const BlueOpts& o) {
  MeasurementNetwork net = load_network_json(o.graph, o.ref);
  std::vector<NodeId> targets = o.targets;
  if (targets.empty()) {
    for (NodeId u = 0; u < net.graph.num_nodes(); ++u)
      if (u != net.reference) targets.push_back(u);
  }
  save_covariance_csv(targets, blue_covariance(net, targets), o.out);
  if (!o.measurements.empty()) {
    if (o.estimates.empty())
      throw precondition_error("blue: --measurements needs --estimates");
    net.measurements = load_measurements_csv(net.graph, net.k, o.measurements);
    std::vector<Eigen::VectorXd> x = blue_solve(net);
    Eigen::MatrixXd states(net.graph.num_nodes(), net.k);
    for (NodeId u = 0; u < net.graph.num_nodes(); ++u) states.row(u) = x[u];
    save_values_csv(states, o.estimates);
  }
  std::cout << "wrote " << targets.size() << " covariance blocks to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reff
// ---------------------------------------------------------------------------

struct ReffOpts {
  std::string graph, pairs, out;
};

int cmd_reff(const ReffOpts& o) {
  GeneralizedNetwork net = as_electrical(load_network_json(o.graph));
  validate(net);
  auto pairs = load_pairs_csv(o.pairs);
  ResistanceSolver rs(net);
  std::vector<Block> blocks;
  blocks.reserve(pairs.size());
  for (auto [u, v] : pairs) blocks.push_back(rs.pair_resistance(u, v));
  save_resistance_csv(pairs, blocks, o.out);
  std::cout << "wrote " << pairs.size() << " resistance blocks to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
  std::string law, graph, out;
  NodeId ref = 0;
  int samples = 30;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  double scale = 2.0;
  int drop = 0;
  int h = 2;
};

nlohmann::ordered_json law_report_json(const LawReport& rep) {
  nlohmann::ordered_json j;
  j["law"] = rep.law;
  j["ok"] = rep.ok;
  j["pairs_checked"] = rep.pairs.size();
  j["min_slack"] = rep.min_slack;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& p : rep.violations())
    j["violations"].push_back({{"u", p.u}, {"v", p.v}, {"slack", p.slack}});
  return j;
}

int cmd_verify(const VerifyOpts& o) {
  MeasurementNetwork net = load_network_json(o.graph, o.ref);
  GeneralizedNetwork elec = as_electrical(net);
  validate(elec);
  const std::size_t n = net.graph.num_nodes();
  nlohmann::ordered_json j;
  bool ok = false;

  if (o.law == "analogy") {
    std::vector<NodeId> targets;
    std::mt19937_64 eng = seeded_engine(o.seed, 0x616e6c67);
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    std::set<NodeId> seen;
    while (targets.size() < std::min<std::size_t>(o.samples, n - 1)) {
      NodeId t = pick(eng);
      if (t != net.reference && seen.insert(t).second) targets.push_back(t);
    }
    std::vector<Block> sigma = blue_covariance(net, targets);
    ResistanceSolver rs(elec, net.reference);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Block reff = rs.pair_resistance(net.reference, targets[i]);
      max_diff = std::max(max_diff, (sigma[i] - reff).cwiseAbs().maxCoeff());
    }
    ok = max_diff <= o.tol;
    j["law"] = "analogy";
    j["ok"] = ok;
    j["targets_checked"] = targets.size();
    j["max_entry_diff"] = max_diff;
    j["tolerance"] = o.tol;
  } else if (o.law == "rayleigh") {
    if (o.scale < 1.0) throw precondition_error("verify rayleigh: --scale must be >= 1");
    GeneralizedNetwork sub = elec;
    int dropped = 0;
    if (o.drop > 0) {
      // drop up to the requested number of edges, never disconnecting
      std::vector<char> keep(net.graph.num_edges(), 1);
      for (std::size_t e = net.graph.num_edges(); e-- > 0 && dropped < o.drop;) {
        keep[e] = 0;
        GraphBuilder b(n, static_cast<std::size_t>(-1));
        for (std::size_t i = 0; i < net.graph.num_edges(); ++i)
          if (keep[i]) b.add_edge(net.graph.edge(i).tail, net.graph.edge(i).head);
        Graph trial = b.build();
        if (is_weakly_connected(trial)) {
          ++dropped;
        } else {
          keep[e] = 1;
        }
      }
      GraphBuilder b(n, static_cast<std::size_t>(-1));
      std::vector<Block> blocks;
      for (std::size_t i = 0; i < net.graph.num_edges(); ++i)
        if (keep[i]) {
          b.add_edge(net.graph.edge(i).tail, net.graph.edge(i).head);
          blocks.push_back(elec.resistance[i]);
        }
      sub.graph = b.build();
      sub.resistance = std::move(blocks);
    }
    for (Block& r : sub.resistance) r *= o.scale;
    Embedding identity;
    identity.map.resize(n);
    for (NodeId u = 0; u < n; ++u) identity.map[u] = u;
    LawReport rep = check_rayleigh(sub, elec, identity, sample_pairs(n, o.samples, o.seed));
    ok = rep.ok;
    j = law_report_json(rep);
    j["scale"] = o.scale;
    if (o.drop > 0) j["edges_dropped"] = dropped;
  } else if (o.law == "triangle") {
    LawReport rep = check_triangle(elec, sample_triples(n, o.samples, o.seed));
    ok = rep.ok;
    j = law_report_json(rep);
  } else {
    FuzzReport rep = fuzz_sandwich(elec, o.h, sample_pairs(n, o.samples, o.seed));
    ok = rep.upper.ok && rep.alpha_hat > 0.0 && (o.h != 1 || rep.alpha_hat == 1.0);
    j = law_report_json(rep.upper);
    j["ok"] = ok;
    j["h"] = rep.h;
    j["alpha_hat"] = rep.alpha_hat;
  }

  emit_json(j, o.out);
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

struct ClassifyOpts {
  std::string graph, drawing, out;
  std::vector<int> cutoffs = {1};
  double min_rho = 0.05;
  double grid_resolution = 0.0;
};

int cmd_classify(const ClassifyOpts& o) {
  MeasurementNetwork net = load_network_json(o.graph);
  Drawing f = load_drawing_csv(o.drawing);
  ParamOptions popts;
  popts.cutoffs = o.cutoffs;
  popts.grid_resolution = o.grid_resolution;
  ClassifyThresholds th;
  th.min_rho = o.min_rho;
  ClassificationReport rep = classify(net.graph, f, th, popts);
  nlohmann::ordered_json j;
  j["s"] = rep.params.s;
  j["r"] = rep.params.r;
  j["gamma"] = {{"lo", rep.params.gamma_lo},
                {"hi", rep.params.gamma_hi},
                {"resolution", rep.params.gamma_resolution}};
  j["rho"] = nlohmann::ordered_json::object();
  for (const auto& [cutoff, value] : rep.params.rho)
    j["rho"][std::to_string(cutoff)] = value;
  j["affine"] = {{"alpha", rep.params.affine.alpha}, {"beta", rep.params.affine.beta}};
  j["connected"] = rep.params.connected;
  j["sparse_evidence"] = rep.sparse_evidence;
  j["dense_evidence"] = rep.dense_evidence;
  j["note"] = rep.note;
  emit_json(j, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string truth, graph, out;
  std::string model = "range-angle";
  std::string law = "gaussian";
  double sigma_r = 0.1, sigma_th = 0.3;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthOpts& o) {
  MeasurementNetwork net = load_network_json(o.graph);
  Eigen::MatrixXd truth = load_values_csv(o.truth);
  std::vector<Eigen::VectorXd> z;
  if (o.model == "range-angle") {
    NoiseModel model = NoiseModel::range_angle(
        o.sigma_r, o.sigma_th,
        o.law == "uniform" ? AngleLaw::kUniform : AngleLaw::kGaussian);
    z = synth_range_angle(truth, net.graph, model, o.seed);
  } else {
    z = synth_gaussian(truth, net.graph, net.covariance, o.seed);
  }
  save_measurements_csv(net.graph, z, o.out);
  std::cout << "wrote " << z.size() << " measurements to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExpOpts {
  std::string family = "lattice";
  std::string out;
  int dim = 2, half_width = 8, fuzz = 1, k = 1;
  int rows = 21, cols = 21;
  int points = 200;
  double range = 1.5, extent = 20.0;
  double alpha = 0.04, beta = 5.0, fail_probability = 0.0;
  std::vector<double> distances;
  double margin = 1.0 / 3.0;
  int threads = 0;
  std::uint64_t seed = 0;
};

int cmd_experiment(const ExpOpts& o) {
  DrawnGraph dg;
  std::optional<NodeId> reference;
  if (o.family == "lattice") {
    LatticeBox box = gen_lattice(o.dim, o.half_width, o.fuzz);
    reference = box.index_of(Eigen::VectorXi::Zero(o.dim));
    dg = {std::move(box.graph), std::move(box.drawing)};
  } else if (o.family == "tri") {
    dg = gen_triangular(o.rows, o.cols);
  } else if (o.family == "geometric") {
    Box box;
    box.lo = Eigen::VectorXd::Zero(o.dim);
    box.hi = Eigen::VectorXd::Constant(o.dim, o.extent);
    dg = gen_geometric(random_points(o.points, box, o.seed), o.range);
  } else {
    FailureSpec spec;
    spec.alpha = o.alpha;
    spec.beta = o.beta;
    spec.fail_probability = o.fail_probability;
    FailedLattice fl = gen_failed_lattice(o.half_width, spec, o.seed);
    dg = {std::move(fl.giant), std::move(fl.giant_drawing)};
  }
  if (!reference) reference = nearest_to_center(dg.drawing);

  RunOptions ropts;
  ropts.margin_fraction = o.margin;
  ropts.threads = o.threads;
  ropts.distances = o.distances;
  if (ropts.distances.empty()) {
    Box bbox = Box::bounding(dg.drawing);
    double reach = std::numeric_limits<double>::infinity();
    for (int i = 0; i < bbox.dim(); ++i)
      reach = std::min(reach, (bbox.hi[i] - bbox.lo[i]) / 2.0);
    reach *= (1.0 - o.margin) * 0.95;
    if (reach <= 2.0)
      throw precondition_error(
          "experiment: box too small for default distances; pass --distances");
    for (int i = 0; i < 8; ++i)
      ropts.distances.push_back(2.0 + i * (reach - 2.0) / 7.0);
  }

  ScalingRun run =
      run_scaling(dg, *reference, o.k, Block::Identity(o.k, o.k), ropts);
  fs::create_directories(o.out);
  emit_report(run, o.out);
  std::cout << "samples: " << run.samples.size() << "\n"
            << "best fit: " << growth_name(run.fit.best)
            << " (goodness " << run.fit.goodness << ")\n"
            << "wrote samples.csv, fit.json, plot.svg to " << o.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal estimation from relative measurements on networks"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* cgen = app.add_subcommand("gen", "Generate a network family");
  cgen->add_option("--family", gen.family, "Graph family")
      ->required()
      ->check(CLI::IsMember({"lattice", "tri", "geometric", "failed-lattice", "tree"}));
  cgen->add_option("--json", gen.json_out, "Output graph JSON path");
  cgen->add_option("--drawing", gen.drawing_out, "Output drawing CSV path");
  cgen->add_option("--seed", gen.seed, "Random seed");
  cgen->add_option("--k", gen.k, "Measurement dimension");
  cgen->add_option("--variance", gen.variance, "Isotropic edge noise variance");
  cgen->add_option("--dim", gen.dim, "Lattice / geometric dimension");
  cgen->add_option("--half-width", gen.half_width, "Lattice half width m for [-m, m]^d");
  cgen->add_option("--fuzz", gen.fuzz, "Lattice fuzz h");
  cgen->add_option("--rows", gen.rows, "Triangular patch rows");
  cgen->add_option("--cols", gen.cols, "Triangular patch columns");
  cgen->add_option("--branching", gen.branching, "Tree branching factor");
  cgen->add_option("--depth", gen.depth, "Tree depth");
  cgen->add_option("--points", gen.points, "Geometric point count");
  cgen->add_option("--extent", gen.extent, "Geometric box side length");
  cgen->add_option("--range", gen.range, "Geometric connection range");
  cgen->add_option("--alpha", gen.alpha, "Failed-lattice window budget alpha");
  cgen->add_option("--beta", gen.beta, "Failed-lattice window budget beta");
  cgen->add_option("--fail-probability", gen.fail_probability,
                   "Failed-lattice thinning probability (default alpha)");

  BlueOpts blue;
  CLI::App* cblue = app.add_subcommand("blue", "Error covariance (and estimates)");
  cblue->add_option("--graph", blue.graph, "Graph JSON path")->required();
  cblue->add_option("--ref", blue.ref, "Reference node");
  cblue->add_option("--targets", blue.targets, "Target nodes")->delimiter(',');
  cblue->add_option("--out", blue.out, "Output covariance CSV")->required();
  cblue->add_option("--measurements", blue.measurements, "Measurements CSV to solve");
  cblue->add_option("--estimates", blue.estimates, "Output estimates CSV");

  ReffOpts reff;
  CLI::App* creff = app.add_subcommand("reff", "Effective resistance for node pairs");
  creff->add_option("--graph", reff.graph, "Graph JSON path")->required();
  creff->add_option("--pairs", reff.pairs, "Pairs CSV path")->required();
  creff->add_option("--out", reff.out, "Output resistance CSV")->required();

  VerifyOpts verify;
  CLI::App* cverify = app.add_subcommand("verify", "Check a network law");
  cverify->add_option("--law", verify.law, "Law to check")
      ->required()
      ->check(CLI::IsMember({"rayleigh", "triangle", "fuzz", "analogy"}));
  cverify->add_option("--graph", verify.graph, "Graph JSON path")->required();
  cverify->add_option("--ref", verify.ref, "Reference node (analogy)");
  cverify->add_option("--samples", verify.samples, "Sampled pairs / triples");
  cverify->add_option("--seed", verify.seed, "Sampling seed");
  cverify->add_option("--tol", verify.tol, "Entry tolerance (analogy)");
  cverify->add_option("--scale", verify.scale, "Resistance scale >= 1 (rayleigh)");
  cverify->add_option("--drop", verify.drop, "Edges to drop (rayleigh)");
  cverify->add_option("--fuzz", verify.h, "Fuzz parameter (fuzz)");
  cverify->add_option("--out", verify.out, "Report JSON path (default stdout)");

  ClassifyOpts classify_o;
  CLI::App* cclassify = app.add_subcommand("classify", "Drawing parameter report");
  cclassify->add_option("--graph", classify_o.graph, "Graph JSON path")->required();
  cclassify->add_option("--drawing", classify_o.drawing, "Drawing CSV path")->required();
  cclassify->add_option("--cutoffs", classify_o.cutoffs, "Denseness cutoffs")
      ->delimiter(',');
  cclassify->add_option("--min-rho", classify_o.min_rho, "Denseness evidence threshold");
  cclassify->add_option("--grid-resolution", classify_o.grid_resolution,
                        "Empty-ball scan resolution outside the plane");
  cclassify->add_option("--out", classify_o.out, "Report JSON path (default stdout)");

  SynthOpts synth;
  CLI::App* csynth = app.add_subcommand("synth", "Synthesize noisy measurements");
  csynth->add_option("--truth", synth.truth, "Ground-truth values CSV")->required();
  csynth->add_option("--graph", synth.graph, "Graph JSON path")->required();
  csynth->add_option("--model", synth.model, "Noise model")
      ->check(CLI::IsMember({"range-angle", "gaussian-relative"}));
  csynth->add_option("--law", synth.law, "Angle error law (range-angle)")
      ->check(CLI::IsMember({"gaussian", "uniform"}));
  csynth->add_option("--sigma-r", synth.sigma_r, "Range noise sigma");
  csynth->add_option("--sigma-th", synth.sigma_th, "Angle noise sigma / half-width");
  csynth->add_option("--seed", synth.seed, "Random seed");
  csynth->add_option("--out", synth.out, "Output measurements CSV")->required();

  ExpOpts exp;
  CLI::App* cexp = app.add_subcommand("experiment", "Error growth vs distance");
  cexp->add_option("--family", exp.family, "Graph family")
      ->check(CLI::IsMember({"lattice", "tri", "geometric", "failed-lattice"}));
  cexp->add_option("--dim", exp.dim, "Lattice / geometric dimension");
  cexp->add_option("--half-width", exp.half_width, "Lattice half width");
  cexp->add_option("--fuzz", exp.fuzz, "Lattice fuzz h");
  cexp->add_option("--k", exp.k, "Measurement dimension");
  cexp->add_option("--rows", exp.rows, "Triangular patch rows");
  cexp->add_option("--cols", exp.cols, "Triangular patch columns");
  cexp->add_option("--points", exp.points, "Geometric point count");
  cexp->add_option("--extent", exp.extent, "Geometric box side length");
  cexp->add_option("--range", exp.range, "Geometric connection range");
  cexp->add_option("--alpha", exp.alpha, "Failed-lattice alpha");
  cexp->add_option("--beta", exp.beta, "Failed-lattice beta");
  cexp->add_option("--fail-probability", exp.fail_probability,
                   "Failed-lattice thinning probability");
  cexp->add_option("--distances", exp.distances, "Requested distances")->delimiter(',');
  cexp->add_option("--margin", exp.margin, "Interior margin fraction");
  cexp->add_option("--threads", exp.threads, "Worker threads (0: RELNET_THREADS)");
  cexp->add_option("--seed", exp.seed, "Random seed");
  cexp->add_option("--out", exp.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cgen->parsed()) return cmd_gen(gen);
    if (cblue->parsed()) return cmd_blue(blue);
    if (creff->parsed()) return cmd_reff(reff);
    if (cverify->parsed()) return cmd_verify(verify);
    if (cclassify->parsed()) return cmd_classify(classify_o);
    if (csynth->parsed()) return cmd_synth(synth);
    if (cexp->parsed()) return cmd_experiment(exp);
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
