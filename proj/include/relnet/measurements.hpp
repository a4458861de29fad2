#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "relnet/graph.hpp"
#include "relnet/network.hpp"
#include "relnet/rng.hpp"
#include "relnet/spd.hpp"
#include "relnet/types.hpp"

namespace relnet {

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

enum class AngleLaw {
  kGaussian,  // delta-theta ~ N(0, sigma_theta^2)
  kUniform,   // delta-theta ~ U[-sigma_theta, sigma_theta] (half-width)
};

struct NoiseModel {
  enum class Kind { kGaussianRelative, kRangeAngle };
  Kind kind = Kind::kGaussianRelative;

  Block covariance;  // gaussian-relative: shared k x k covariance

  double sigma_r = 0.0;      // range-angle: range noise std dev
  double sigma_theta = 0.0;  // range-angle: angle parameter per law
  AngleLaw angle_law = AngleLaw::kGaussian;

  static NoiseModel gaussian_relative(Block cov) {
    NoiseModel m;
    m.kind = Kind::kGaussianRelative;
    m.covariance = std::move(cov);
    return m;
  }

  static NoiseModel range_angle(double sigma_r, double sigma_theta,
                                AngleLaw law = AngleLaw::kGaussian) {
    NoiseModel m;
    m.kind = Kind::kRangeAngle;
    m.sigma_r = sigma_r;
    m.sigma_theta = sigma_theta;
    m.angle_law = law;
    return m;
  }
};

/// True node variables; the reference row must be zero.
struct GroundTruth {
  Eigen::MatrixXd values;  // n x k
  NodeId reference = 0;

  void validate() const {
    if (reference >= static_cast<NodeId>(values.rows()))
      throw precondition_error("GroundTruth: reference out of range");
    if (values.row(reference).cwiseAbs().maxCoeff() != 0.0)
      throw precondition_error("GroundTruth: reference row must be zero");
  }
};

/// Mean cosine of the angle error, E[cos(delta-theta)]. Closed forms:
/// exp(-sigma^2 / 2) for the Gaussian law, sin(a) / a for the uniform law
/// on [-a, a].
inline double cbar(const NoiseModel& model) {
  if (model.kind != NoiseModel::Kind::kRangeAngle)
    throw precondition_error("cbar: model has no angle-error law");
  if (model.sigma_theta < 0 || model.sigma_r < 0)
    throw precondition_error("cbar: noise parameters must be non-negative");
  switch (model.angle_law) {
    case AngleLaw::kGaussian:
      return std::exp(-0.5 * model.sigma_theta * model.sigma_theta);
    case AngleLaw::kUniform:
      return model.sigma_theta == 0.0 ? 1.0
                                      : std::sin(model.sigma_theta) / model.sigma_theta;
  }
  throw precondition_error("cbar: unknown angle-error law");
}

namespace detail {

inline double draw_normal(std::mt19937_64& eng, double sigma) {
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(eng);
}

inline double draw_angle(std::mt19937_64& eng, const NoiseModel& model) {
  switch (model.angle_law) {
    case AngleLaw::kGaussian:
      return draw_normal(eng, model.sigma_theta);
    case AngleLaw::kUniform: {
      if (model.sigma_theta == 0.0) return 0.0;
      std::uniform_real_distribution<double> dist(-model.sigma_theta,
                                                  model.sigma_theta);
      return dist(eng);
    }
  }
  throw precondition_error("draw_angle: unknown angle-error law");
}

constexpr std::uint64_t kGaussianSalt = 0x67617573;     // per-edge stream tags
constexpr std::uint64_t kRangeAngleSalt = 0x72616e67;
constexpr std::uint64_t kCovarianceSalt = 0x65636f76;

/// Stream key from the edge endpoints, so draws are independent of the
/// order edges were added in.
inline std::uint64_t edge_key(const Edge& e) {
  return (static_cast<std::uint64_t>(e.tail) << 32) | e.head;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// Draws one relative measurement per edge, zeta_e = x_tail - x_head + eps
/// with eps ~ N(0, cov[e]). Each edge owns an independent engine derived
/// from (seed, edge index), so results do not depend on iteration order.
inline std::vector<Eigen::VectorXd> synth_gaussian(const Eigen::MatrixXd& truth,
                                                   const Graph& g,
                                                   const std::vector<Block>& cov,
                                                   std::uint64_t seed) {
  const int k = static_cast<int>(truth.cols());
  if (truth.rows() != static_cast<Eigen::Index>(g.num_nodes()))
    throw precondition_error("synth_gaussian: truth size mismatch");
  detail::validate_blocks(g, k, cov, "synth_gaussian");
  if (g.has_parallel_edges())
    throw precondition_error("synth_gaussian: parallel edges would share a stream");
  std::vector<Eigen::VectorXd> out(g.num_edges());
  for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    Eigen::LLT<Block> llt(cov[e]);
    if (llt.info() != Eigen::Success)
      throw precondition_error("synth_gaussian: covariance not SPD on edge " +
                               std::to_string(e));
    std::mt19937_64 eng =
        seeded_engine(seed, detail::kGaussianSalt, detail::edge_key(ed));
    Eigen::VectorXd z(k);
    for (int i = 0; i < k; ++i) z[i] = detail::draw_normal(eng, 1.0);
    out[e] = (truth.row(ed.tail) - truth.row(ed.head)).transpose() +
             llt.matrixL() * z;
  }
  return out;
}

/// Draws one range/angle measurement per edge in the plane and converts it
/// to an unbiased relative measurement: with r-hat = r + delta-r and
/// theta-hat = theta + delta-theta,
///   zeta = (1 / cbar) * [r-hat cos(theta-hat), r-hat sin(theta-hat)].
/// Unbiasedness needs only independent noise, E[delta-r] = 0 and
/// E[sin(delta-theta)] = 0; it holds for any symmetric angle law.
inline std::vector<Eigen::VectorXd> synth_range_angle(const Eigen::MatrixXd& truth,
                                                      const Graph& g,
                                                      const NoiseModel& model,
                                                      std::uint64_t seed) {
  if (model.kind != NoiseModel::Kind::kRangeAngle)
    throw precondition_error("synth_range_angle: model kind mismatch");
  if (truth.cols() != 2)
    throw precondition_error("synth_range_angle: range/angle needs k = 2");
  if (truth.rows() != static_cast<Eigen::Index>(g.num_nodes()))
    throw precondition_error("synth_range_angle: truth size mismatch");
  const double c = cbar(model);
  if (g.has_parallel_edges())
    throw precondition_error("synth_range_angle: parallel edges would share a stream");
  std::vector<Eigen::VectorXd> out(g.num_edges());
  for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    Eigen::Vector2d delta = truth.row(ed.tail) - truth.row(ed.head);
    double r = delta.norm();
    if (r < 1e-12)
      throw precondition_error("synth_range_angle: coincident endpoints on edge " +
                               std::to_string(e));
    double theta = std::atan2(delta.y(), delta.x());
    std::mt19937_64 eng =
        seeded_engine(seed, detail::kRangeAngleSalt, detail::edge_key(ed));
    double r_hat = r + detail::draw_normal(eng, model.sigma_r);
    double theta_hat = theta + detail::draw_angle(eng, model);
    out[e] = Eigen::Vector2d(r_hat * std::cos(theta_hat), r_hat * std::sin(theta_hat)) / c;
  }
  return out;
}

/// Sample covariance of the range/angle measurement error over `num_draws`
/// draws for one edge with true displacement `delta`, plus a 1e-9 identity
/// floor so the result stays SPD even in the noiseless limit. Feeding this
/// into the estimator makes it approximately optimal: the weights are
/// estimates, not the exact error covariance.
inline Block empirical_edge_covariance(const NoiseModel& model,
                                       const Eigen::Vector2d& delta, int num_draws,
                                       std::uint64_t seed) {
  if (model.kind != NoiseModel::Kind::kRangeAngle)
    throw precondition_error("empirical_edge_covariance: model kind mismatch");
  if (num_draws < 1000)
    throw precondition_error("empirical_edge_covariance: need at least 1000 draws");
  double r = delta.norm();
  if (r < 1e-12)
    throw precondition_error("empirical_edge_covariance: coincident endpoints");
  const double c = cbar(model);
  const double theta = std::atan2(delta.y(), delta.x());
  std::mt19937_64 eng = seeded_engine(seed, detail::kCovarianceSalt, 0);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sq = Eigen::Matrix2d::Zero();
  for (int t = 0; t < num_draws; ++t) {
    double r_hat = r + detail::draw_normal(eng, model.sigma_r);
    double theta_hat = theta + detail::draw_angle(eng, model);
    Eigen::Vector2d eps =
        Eigen::Vector2d(r_hat * std::cos(theta_hat), r_hat * std::sin(theta_hat)) / c -
        delta;
    mean += eps;
    sq += eps * eps.transpose();
  }
  mean /= num_draws;
  Block cov = (sq - num_draws * mean * mean.transpose()) / (num_draws - 1.0);
  cov = 0.5 * (cov + cov.transpose());
  cov += 1e-9 * Block::Identity(2, 2);
  return cov;
}

}  // namespace relnet
