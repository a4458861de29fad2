#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "relnet/drawing.hpp"
#include "relnet/graph.hpp"
#include "relnet/laplacian.hpp"
#include "relnet/netgen.hpp"
#include "relnet/network.hpp"
#include "relnet/spd.hpp"
#include "relnet/types.hpp"

namespace relnet {

// ---------------------------------------------------------------------------
// Growth-model fitting
// ---------------------------------------------------------------------------

enum class GrowthClass { kLinear, kLog, kBounded };

inline const char* growth_name(GrowthClass c) {
  switch (c) {
    case GrowthClass::kLinear: return "linear";
    case GrowthClass::kLog: return "log";
    case GrowthClass::kBounded: return "bounded";
  }
  return "unknown";
}

struct FitThresholds {
  /// A max/min spread below this declares the series bounded regardless of
  /// the regression scores.
  double bounded_spread = 1.15;
};

struct GrowthFit {
  GrowthClass best = GrowthClass::kBounded;
  double linear_slope = 0.0, linear_intercept = 0.0, linear_r2 = 0.0;
  double log_slope = 0.0, log_intercept = 0.0, log_r2 = 0.0;
  double bounded_mean = 0.0, bounded_spread = 1.0;
  double goodness = 0.0;  // in [0, 1]
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  LineFit out;
  if (std::abs(denom) < 1e-30) return out;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;
  double ybar = sy / n, ssr = 0, sst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (out.slope * x[i] + out.intercept);
    ssr += e * e;
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  out.r2 = sst < 1e-30 ? 0.0 : std::clamp(1.0 - ssr / sst, 0.0, 1.0);
  return out;
}

}  // namespace detail

/// Fits the three growth models of interest to (distance, value) samples:
/// value vs distance, value vs ln distance, and a constant. The bounded
/// model is scored by its max/min spread and overrides the regressions when
/// the spread is small.
inline GrowthFit fit_growth(const std::vector<std::pair<double, double>>& samples,
                            const FitThresholds& th = {}) {
  if (samples.size() < 5)
    throw precondition_error("fit_growth: need at least 5 samples");
  std::vector<double> x, lx, y;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& [d, v] : samples) {
    if (d <= 0.0)
      throw precondition_error("fit_growth: distances must be positive");
    x.push_back(d);
    lx.push_back(std::log(d));
    y.push_back(v);
    xmin = std::min(xmin, d);
    xmax = std::max(xmax, d);
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  if (xmax - xmin < 1e-12)
    throw precondition_error("fit_growth: degenerate distances");

  GrowthFit out;
  detail::LineFit lin = detail::least_squares(x, y);
  detail::LineFit lg = detail::least_squares(lx, y);
  out.linear_slope = lin.slope;
  out.linear_intercept = lin.intercept;
  out.linear_r2 = lin.r2;
  out.log_slope = lg.slope;
  out.log_intercept = lg.intercept;
  out.log_r2 = lg.r2;
  double sum = 0.0;
  for (double v : y) sum += v;
  out.bounded_mean = sum / static_cast<double>(y.size());
  out.bounded_spread =
      ymin > 0.0 ? ymax / ymin : std::numeric_limits<double>::infinity();

  if (out.bounded_spread < th.bounded_spread) {
    out.best = GrowthClass::kBounded;
    out.goodness = std::min(1.0, 1.0 / out.bounded_spread);
  } else if (out.linear_r2 >= out.log_r2) {
    out.best = GrowthClass::kLinear;
    out.goodness = out.linear_r2;
  } else {
    out.best = GrowthClass::kLog;
    out.goodness = out.log_r2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaling runs
// ---------------------------------------------------------------------------

struct ScalingSample {
  NodeId node = kInvalidNode;
  double distance = 0.0;  // drawn distance to the reference
  Block sigma;
  double proxy = 0.0;      // max eigenvalue of sigma
  double proxy_min = 0.0;  // min eigenvalue of sigma
};

struct ScalingRun {
  NodeId reference = kInvalidNode;
  double margin_fraction = 0.0;
  std::vector<ScalingSample> samples;  // sorted by distance
  GrowthFit fit;      // on the max-eigenvalue series
  GrowthFit fit_min;  // on the min-eigenvalue series
};

struct RunOptions {
  std::vector<double> distances;       // requested distances from the reference
  double margin_fraction = 1.0 / 3.0;  // interior margin, fraction of half-extent
  FitThresholds fit;
  int threads = 0;  // 0: RELNET_THREADS env var, else hardware concurrency
};

/// Thread count for a batch of independent jobs, honoring the explicit
/// request first, then the RELNET_THREADS environment variable.
inline int resolve_threads(int requested, std::size_t jobs) {
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("RELNET_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return static_cast<int>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

/// Exact error-covariance scaling on one drawn graph with a constant
/// resistance block: for each requested distance, picks the interior node
/// whose drawn distance to the reference is closest, computes its covariance
/// against the shared factorization, and fits the growth models to the
/// eigenvalue series. Interior means at least `margin_fraction` of the
/// half-extent away from the bounding box on every axis.
inline ScalingRun run_scaling(const DrawnGraph& dg, NodeId reference, int k,
                              const Block& resistance, const RunOptions& opts) {
  const Graph& g = dg.graph;
  const Drawing& f = dg.drawing;
  if (g.num_nodes() != f.num_nodes())
    throw precondition_error("run_scaling: drawing size mismatch");
  if (reference >= g.num_nodes())
    throw precondition_error("run_scaling: reference out of range");
  if (opts.distances.empty())
    throw precondition_error("run_scaling: no distances requested");
  if (opts.margin_fraction < 0.0 || opts.margin_fraction >= 1.0)
    throw precondition_error("run_scaling: margin fraction must be in [0, 1)");
  require_spd(resistance, "run_scaling resistance");
  if (resistance.rows() != k)
    throw precondition_error("run_scaling: resistance block is not k x k");

  Box bbox = Box::bounding(f);
  Eigen::VectorXd center = 0.5 * (bbox.lo + bbox.hi);
  Eigen::VectorXd reach = (1.0 - opts.margin_fraction) * 0.5 * (bbox.hi - bbox.lo);
  auto interior = [&](NodeId u) {
    for (int i = 0; i < f.dim; ++i)
      if (std::abs(f.coords(u, i) - center[i]) > reach[i] + 1e-9) return false;
    return true;
  };
  if (!interior(reference))
    throw precondition_error("run_scaling: reference is not interior");

  ScalingRun out;
  out.reference = reference;
  out.margin_fraction = opts.margin_fraction;

  std::set<NodeId> chosen;
  for (double dd : opts.distances) {
    double best = std::numeric_limits<double>::infinity();
    NodeId pick = kInvalidNode;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      if (u == reference || !interior(u)) continue;
      double df = (f.coords.row(u) - f.coords.row(reference)).norm();
      if (std::abs(df - dd) < best) {
        best = std::abs(df - dd);
        pick = u;
      }
    }
    if (pick == kInvalidNode || best > std::max(1.0, 0.25 * dd))
      throw precondition_error(
          "run_scaling: no interior node near requested distance " +
          std::to_string(dd) + "; samples too close to the boundary are rejected");
    chosen.insert(pick);
  }

  GeneralizedNetwork net{g, k, std::vector<Block>(g.num_edges(), resistance)};
  GroundedSystem sys(net.graph, net.k, net.resistance, reference);

  std::vector<NodeId> targets(chosen.begin(), chosen.end());
  out.samples.resize(targets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= targets.size()) break;
      NodeId u = targets[i];
      Eigen::MatrixXd cols = sys.node_columns(u);
      Block sigma = sys.block_at(cols, u);
      sigma = 0.5 * (sigma + sigma.transpose());
      Eigen::SelfAdjointEigenSolver<Block> eig(sigma);
      ScalingSample& s = out.samples[i];
      s.node = u;
      s.distance = (f.coords.row(u) - f.coords.row(reference)).norm();
      s.sigma = std::move(sigma);
      s.proxy = eig.eigenvalues().maxCoeff();
      s.proxy_min = eig.eigenvalues().minCoeff();
    }
  };
  int nthreads = resolve_threads(opts.threads, targets.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(out.samples.begin(), out.samples.end(),
            [](const ScalingSample& a, const ScalingSample& b) {
              return a.distance != b.distance ? a.distance < b.distance
                                              : a.node < b.node;
            });
  std::vector<std::pair<double, double>> maxs, mins;
  for (const ScalingSample& s : out.samples) {
    maxs.push_back({s.distance, s.proxy});
    mins.push_back({s.distance, s.proxy_min});
  }
  out.fit = fit_growth(maxs, opts.fit);
  out.fit_min = fit_growth(mins, opts.fit);
  return out;
}

// ---------------------------------------------------------------------------
// Degree-six trio
// ---------------------------------------------------------------------------

struct TrioOptions {
  int line_half_width = 400;
  int tri_rows = 61;
  int tri_cols = 61;
  int cube_half_width = 10;
  int threads = 0;
};

struct TrioEntry {
  std::string name;
  bool interior_degree_six = false;
  GrowthClass expected = GrowthClass::kBounded;
  ScalingRun run;
  bool class_ok = false;
};

struct TrioReport {
  std::vector<TrioEntry> entries;
  bool ok = false;
};

/// Three graphs with identical interior degree six and three different error
/// growth laws: the 3-fuzzed line grows linearly, the triangular lattice
/// logarithmically, and the cubic lattice stays bounded. Degree alone says
/// nothing about estimation quality; the drawing dimension does.
inline TrioReport counterexample_trio(const TrioOptions& opts = {}) {
  TrioReport out;
  Block unit = Block::Identity(1, 1);

  {
    TrioEntry e;
    e.name = "fuzzed-line";
    e.expected = GrowthClass::kLinear;
    LatticeBox line = gen_lattice(1, opts.line_half_width);
    DrawnGraph dg{h_fuzz(line.graph, 3), line.drawing};
    e.interior_degree_six = true;
    for (NodeId u = 0; u < dg.graph.num_nodes(); ++u) {
      int x = line.point_of(u)[0];
      if (x >= line.lo[0] + 3 && x <= line.hi[0] - 3 && dg.graph.degree(u) != 6)
        e.interior_degree_six = false;
    }
    RunOptions ro;
    ro.threads = opts.threads;
    for (int d = 10; d <= 100; d += 10) ro.distances.push_back(d);
    e.run = run_scaling(dg, line.index_of(Eigen::VectorXi::Zero(1)), 1, unit, ro);
    e.class_ok = e.run.fit.best == e.expected;
    out.entries.push_back(std::move(e));
  }

  {
    TrioEntry e;
    e.name = "triangular";
    e.expected = GrowthClass::kLog;
    DrawnGraph dg = gen_triangular(opts.tri_rows, opts.tri_cols);
    e.interior_degree_six = true;
    for (int r = 1; r + 1 < opts.tri_rows; ++r)
      for (int c = 1; c + 1 < opts.tri_cols; ++c)
        if (dg.graph.degree(static_cast<NodeId>(r * opts.tri_cols + c)) != 6)
          e.interior_degree_six = false;
    Box bbox = Box::bounding(dg.drawing);
    Eigen::VectorXd center = 0.5 * (bbox.lo + bbox.hi);
    NodeId ref = 0;
    double best = std::numeric_limits<double>::infinity();
    for (NodeId u = 0; u < dg.graph.num_nodes(); ++u) {
      double d = (dg.drawing.coords.row(u).transpose() - center).norm();
      if (d < best) {
        best = d;
        ref = u;
      }
    }
    RunOptions ro;
    ro.threads = opts.threads;
    for (int d = 3; d <= 12; ++d) ro.distances.push_back(d);
    e.run = run_scaling(dg, ref, 1, unit, ro);
    e.class_ok = e.run.fit.best == e.expected;
    out.entries.push_back(std::move(e));
  }

  {
    TrioEntry e;
    e.name = "cubic";
    e.expected = GrowthClass::kBounded;
    LatticeBox cube = gen_lattice(3, opts.cube_half_width);
    e.interior_degree_six = true;
    for (NodeId u = 0; u < cube.graph.num_nodes(); ++u) {
      Eigen::VectorXi p = cube.point_of(u);
      bool inside = true;
      for (int i = 0; i < 3; ++i)
        if (p[i] == cube.lo[i] || p[i] == cube.hi[i]) inside = false;
      if (inside && cube.graph.degree(u) != 6) e.interior_degree_six = false;
    }
    RunOptions ro;
    ro.threads = opts.threads;
    ro.distances = {4.0, 4.5, 5.0, 5.5, 6.0};
    DrawnGraph dg{cube.graph, cube.drawing};
    e.run = run_scaling(dg, cube.index_of(Eigen::VectorXi::Zero(3)), 1, unit, ro);
    e.class_ok = e.run.fit.best == e.expected;
    out.entries.push_back(std::move(e));
  }

  out.ok = true;
  for (const TrioEntry& e : out.entries)
    out.ok = out.ok && e.interior_degree_six && e.class_ok;
  return out;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) throw io_error("emit_report: cannot open " + path.string());
  ofs << body;
  ofs.flush();
  if (!ofs) throw io_error("emit_report: write failed for " + path.string());
}

}  // namespace detail

/// Writes samples.csv, fit.json and plot.svg for a completed run into `dir`.
/// Output is byte-deterministic for identical runs.
inline void emit_report(const ScalingRun& run, const std::filesystem::path& dir) {
  if (run.samples.empty())
    throw precondition_error("emit_report: run has no samples");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("emit_report: cannot create " + dir.string());

  const int k = static_cast<int>(run.samples.front().sigma.rows());
  std::string csv = "node,distance,proxy,proxy_min";
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      csv += ",sigma_" + std::to_string(i) + "_" + std::to_string(j);
  csv += "\n";
  for (const ScalingSample& s : run.samples) {
    csv += std::to_string(s.node) + "," + detail::fmt(s.distance) + "," +
           detail::fmt(s.proxy) + "," + detail::fmt(s.proxy_min);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) csv += "," + detail::fmt(s.sigma(i, j));
    csv += "\n";
  }
  detail::write_file(dir / "samples.csv", csv);

  nlohmann::ordered_json j;
  j["reference"] = run.reference;
  j["margin_fraction"] = run.margin_fraction;
  j["samples"] = run.samples.size();
  j["best"] = growth_name(run.fit.best);
  j["goodness"] = run.fit.goodness;
  j["linear"] = {{"slope", run.fit.linear_slope},
                 {"intercept", run.fit.linear_intercept},
                 {"r2", run.fit.linear_r2}};
  j["log"] = {{"slope", run.fit.log_slope},
              {"intercept", run.fit.log_intercept},
              {"r2", run.fit.log_r2}};
  j["bounded"] = {{"mean", run.fit.bounded_mean},
                  {"spread", run.fit.bounded_spread}};
  j["min_eigenvalue_best"] = growth_name(run.fit_min.best);
  detail::write_file(dir / "fit.json", j.dump(2) + "\n");

  // scatter of (distance, proxy) with the best-fit curve
  const double width = 640, height = 480, pad = 50;
  double xmin = run.samples.front().distance, xmax = run.samples.back().distance;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const ScalingSample& s : run.samples) {
    ymin = std::min(ymin, s.proxy);
    ymax = std::max(ymax, s.proxy);
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  double yspan = ymax - ymin < 1e-12 ? 1.0 : ymax - ymin;
  auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (width - 2 * pad); };
  auto sy = [&](double y) { return height - pad - (y - ymin) / yspan * (height - 2 * pad); };
  auto model = [&](double x) {
    switch (run.fit.best) {
      case GrowthClass::kLinear: return run.fit.linear_slope * x + run.fit.linear_intercept;
      case GrowthClass::kLog: return run.fit.log_slope * std::log(x) + run.fit.log_intercept;
      case GrowthClass::kBounded: return run.fit.bounded_mean;
    }
    return 0.0;
  };
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
      "viewBox=\"0 0 640 480\">\n"
      "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + detail::fmt(pad) + "\" y1=\"" + detail::fmt(height - pad) +
         "\" x2=\"" + detail::fmt(width - pad) + "\" y2=\"" + detail::fmt(height - pad) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::fmt(pad) + "\" y1=\"" + detail::fmt(height - pad) +
         "\" x2=\"" + detail::fmt(pad) + "\" y2=\"" + detail::fmt(pad) +
         "\" stroke=\"black\"/>\n";
  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (int i = 0; i <= 100; ++i) {
    double x = xmin + (xmax - xmin) * i / 100.0;
    double y = std::clamp(model(x), ymin - yspan, ymax + yspan);
    svg += detail::fmt(sx(x)) + "," + detail::fmt(sy(y)) + (i < 100 ? " " : "");
  }
  svg += "\"/>\n";
  for (const ScalingSample& s : run.samples)
    svg += "<circle cx=\"" + detail::fmt(sx(s.distance)) + "\" cy=\"" +
           detail::fmt(sy(s.proxy)) + "\" r=\"3\" fill=\"crimson\"/>\n";
  svg += "<text x=\"" + detail::fmt(width / 2) + "\" y=\"" + detail::fmt(height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
         "distance to reference</text>\n";
  svg += "<text x=\"16\" y=\"" + detail::fmt(height / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 " + detail::fmt(height / 2) + ")\">"
         "max eigenvalue of covariance</text>\n";
  svg += "<text x=\"" + detail::fmt(width - pad) + "\" y=\"" + detail::fmt(pad - 10) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\">best fit: ";
  svg += growth_name(run.fit.best);
  svg += "</text>\n</svg>\n";
  detail::write_file(dir / "plot.svg", svg);
}

}  // namespace relnet
