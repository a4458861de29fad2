#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relnet/experiments.hpp"
#include "relnet/netgen.hpp"

using namespace relnet;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream ifs(p, std::ios::binary);
  REQUIRE(ifs);
  std::ostringstream ss;
  ss << ifs.rdbuf();
  return ss.str();
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + needle.size()))
    ++n;
  return n;
}

ScalingRun small_line_run() {
  LatticeBox line = gen_lattice(1, 30);
  RunOptions ro;
  for (int d = 3; d <= 10; ++d) ro.distances.push_back(d);
  DrawnGraph dg{line.graph, line.drawing};
  return run_scaling(dg, line.index_of(Eigen::VectorXi::Zero(1)), 1,
                     Block::Identity(1, 1), ro);
}

}  // namespace

TEST_CASE("growth fitting on synthetic series", "[experiments]") {
  std::vector<std::pair<double, double>> lin, lg, flat;
  for (int d = 1; d <= 10; ++d) {
    lin.push_back({double(d), 2.0 * d + 1.0});
    lg.push_back({double(d), std::log(double(d)) + 0.5});
    flat.push_back({double(d), 3.0});
  }
  GrowthFit a = fit_growth(lin);
  CHECK(a.best == GrowthClass::kLinear);
  CHECK(a.linear_slope == Catch::Approx(2.0).margin(1e-12));
  CHECK(a.linear_intercept == Catch::Approx(1.0).margin(1e-12));
  CHECK(a.goodness >= 1.0 - 1e-12);

  GrowthFit b = fit_growth(lg);
  CHECK(b.best == GrowthClass::kLog);
  CHECK(b.log_slope == Catch::Approx(1.0).margin(1e-12));
  CHECK(b.log_r2 >= 1.0 - 1e-12);

  GrowthFit c = fit_growth(flat);
  CHECK(c.best == GrowthClass::kBounded);
  CHECK(c.bounded_spread == Catch::Approx(1.0).margin(1e-12));
  CHECK(c.bounded_mean == Catch::Approx(3.0).margin(1e-12));

  CHECK_THROWS_AS(fit_growth({{1, 1}, {2, 2}, {3, 3}}), precondition_error);
  std::vector<std::pair<double, double>> degenerate(6, {2.0, 1.0});
  CHECK_THROWS_AS(fit_growth(degenerate), precondition_error);
  std::vector<std::pair<double, double>> nonpos = {
      {-1, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}};
  CHECK_THROWS_AS(fit_growth(nonpos), precondition_error);
}

TEST_CASE("line covariance grows exactly linearly", "[experiments]") {
  LatticeBox line = gen_lattice(1, 30);
  Block p(2, 2);
  p << 1.3, 0.2, 0.2, 0.9;
  RunOptions ro;
  for (int d = 3; d <= 10; ++d) ro.distances.push_back(d);
  DrawnGraph dg{line.graph, line.drawing};
  ScalingRun run =
      run_scaling(dg, line.index_of(Eigen::VectorXi::Zero(1)), 2, p, ro);
  REQUIRE(run.samples.size() == 8);
  for (const ScalingSample& s : run.samples) {
    Block expected = s.distance * p;
    CHECK((s.sigma - expected).cwiseAbs().maxCoeff() <= 1e-9);
  }
  CHECK(run.fit.best == GrowthClass::kLinear);
  CHECK(run.fit.goodness >= 1.0 - 1e-9);
  CHECK(run.fit_min.best == GrowthClass::kLinear);
}

TEST_CASE("square lattice covariance grows logarithmically", "[experiments][slow]") {
  LatticeBox box = gen_lattice(2, 32);
  RunOptions ro;
  for (int d = 2; d <= 20; ++d) ro.distances.push_back(d);
  DrawnGraph dg{box.graph, box.drawing};
  ScalingRun run = run_scaling(dg, box.index_of(Eigen::VectorXi::Zero(2)), 1,
                               Block::Identity(1, 1), ro);
  CHECK(run.fit.best == GrowthClass::kLog);
  CHECK(run.fit.log_r2 >= 0.99);
  CHECK(run.fit.log_r2 > run.fit.linear_r2);
  CHECK(run.fit.bounded_spread >= 1.15);
}

TEST_CASE("matrix-valued series agree on the growth class", "[experiments][slow]") {
  LatticeBox box = gen_lattice(2, 16);
  Block p(2, 2);
  p << 1.0, 0.3, 0.3, 2.0;
  RunOptions ro;
  for (int d = 2; d <= 10; ++d) ro.distances.push_back(d);
  DrawnGraph dg{box.graph, box.drawing};
  ScalingRun run =
      run_scaling(dg, box.index_of(Eigen::VectorXi::Zero(2)), 2, p, ro);
  CHECK(run.fit.best == GrowthClass::kLog);
  CHECK(run.fit_min.best == GrowthClass::kLog);
}

TEST_CASE("cubic lattice covariance stays bounded", "[experiments][slow]") {
  LatticeBox box = gen_lattice(3, 8);
  RunOptions ro;
  ro.distances = {3.0, 3.5, 4.0, 4.5, 5.0};
  DrawnGraph dg{box.graph, box.drawing};
  ScalingRun run = run_scaling(dg, box.index_of(Eigen::VectorXi::Zero(3)), 1,
                               Block::Identity(1, 1), ro);
  CHECK(run.fit.best == GrowthClass::kBounded);
  CHECK(run.fit.bounded_spread < 1.15);
}

TEST_CASE("doubling the box barely moves the log slope", "[experiments][slow]") {
  RunOptions ro;
  for (int d = 2; d <= 20; ++d) ro.distances.push_back(d);
  LatticeBox small = gen_lattice(2, 32);
  LatticeBox big = gen_lattice(2, 64);
  DrawnGraph ds{small.graph, small.drawing};
  DrawnGraph db{big.graph, big.drawing};
  ScalingRun rs = run_scaling(ds, small.index_of(Eigen::VectorXi::Zero(2)), 1,
                              Block::Identity(1, 1), ro);
  ScalingRun rb = run_scaling(db, big.index_of(Eigen::VectorXi::Zero(2)), 1,
                              Block::Identity(1, 1), ro);
  CHECK(std::abs(rb.fit.log_slope - rs.fit.log_slope) <=
        0.10 * std::abs(rs.fit.log_slope));
}

TEST_CASE("boundary margin rejects unreachable distances", "[experiments]") {
  LatticeBox line = gen_lattice(1, 12);
  RunOptions ro;
  ro.distances = {10.0};  // interior reach is (2/3) * 12 = 8
  DrawnGraph dg{line.graph, line.drawing};
  CHECK_THROWS_AS(run_scaling(dg, line.index_of(Eigen::VectorXi::Zero(1)), 1,
                              Block::Identity(1, 1), ro),
                  precondition_error);
  ro.distances = {5.0};
  ro.margin_fraction = 0.0;
  ScalingRun ok_run;  // margin zero admits everything, but needs 5+ samples
  ro.distances = {2, 3, 4, 5, 6};
  ok_run = run_scaling(dg, line.index_of(Eigen::VectorXi::Zero(1)), 1,
                       Block::Identity(1, 1), ro);
  CHECK(ok_run.samples.size() == 5);
}

TEST_CASE("degree-six trio separates the growth classes", "[experiments][slow]") {
  TrioReport rep = counterexample_trio();
  REQUIRE(rep.entries.size() == 3);
  CHECK(rep.entries[0].name == "fuzzed-line");
  CHECK(rep.entries[0].interior_degree_six);
  CHECK(rep.entries[0].run.fit.best == GrowthClass::kLinear);
  CHECK(rep.entries[1].name == "triangular");
  CHECK(rep.entries[1].interior_degree_six);
  CHECK(rep.entries[1].run.fit.best == GrowthClass::kLog);
  CHECK(rep.entries[2].name == "cubic");
  CHECK(rep.entries[2].interior_degree_six);
  CHECK(rep.entries[2].run.fit.best == GrowthClass::kBounded);
  CHECK(rep.ok);
}

TEST_CASE("threaded runs reproduce the serial result", "[experiments]") {
  LatticeBox box = gen_lattice(2, 10);
  RunOptions ro;
  for (int d = 2; d <= 8; ++d) ro.distances.push_back(d);
  DrawnGraph dg{box.graph, box.drawing};
  ro.threads = 1;
  ScalingRun serial = run_scaling(dg, box.index_of(Eigen::VectorXi::Zero(2)), 1,
                                  Block::Identity(1, 1), ro);
  ro.threads = 4;
  ScalingRun threaded = run_scaling(dg, box.index_of(Eigen::VectorXi::Zero(2)), 1,
                                    Block::Identity(1, 1), ro);
  REQUIRE(serial.samples.size() == threaded.samples.size());
  for (std::size_t i = 0; i < serial.samples.size(); ++i) {
    CHECK(serial.samples[i].node == threaded.samples[i].node);
    CHECK(serial.samples[i].proxy == threaded.samples[i].proxy);
  }
}

TEST_CASE("thread resolution honors the environment variable", "[experiments]") {
  setenv("RELNET_THREADS", "2", 1);
  CHECK(resolve_threads(0, 8) == 2);
  CHECK(resolve_threads(3, 8) == 3);  // explicit request wins
  unsetenv("RELNET_THREADS");
  CHECK(resolve_threads(16, 4) == 4);  // capped by job count
  CHECK(resolve_threads(0, 1) == 1);
}

TEST_CASE("report emission is byte-deterministic", "[experiments]") {
  ScalingRun run = small_line_run();
  auto base = std::filesystem::temp_directory_path() / "relnet_report_test";
  std::filesystem::remove_all(base);
  emit_report(run, base / "a");
  emit_report(run, base / "b");
  for (const char* name : {"samples.csv", "fit.json", "plot.svg"})
    CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));

  std::string csv = slurp(base / "a" / "samples.csv");
  CHECK(csv.rfind("node,distance,proxy,proxy_min", 0) == 0);
  CHECK(count_occurrences(csv, "\n") == run.samples.size() + 1);

  auto fit = nlohmann::json::parse(slurp(base / "a" / "fit.json"));
  CHECK(fit.at("best") == "linear");
  CHECK(fit.at("linear").at("slope").get<double>() == Catch::Approx(1.0).margin(1e-9));
  CHECK(fit.at("goodness").get<double>() >= 0.0);
  CHECK(fit.at("goodness").get<double>() <= 1.0);

  std::string svg = slurp(base / "a" / "plot.svg");
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count_occurrences(svg, "<circle") == run.samples.size());
  CHECK(count_occurrences(svg, "<polyline") == 1);

  ScalingRun empty;
  CHECK_THROWS_AS(emit_report(empty, base / "c"), precondition_error);

  // a file where a directory is needed surfaces the path in the error
  auto file_path = base / "not_a_dir";
  std::ofstream(file_path) << "x";
  CHECK_THROWS_AS(emit_report(run, file_path / "sub"), io_error);
  std::filesystem::remove_all(base);
}
