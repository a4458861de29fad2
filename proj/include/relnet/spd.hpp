#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "relnet/types.hpp"

namespace relnet {

/// Relative floor under which an eigenvalue counts as numerically zero.
inline constexpr double kSpdRelTol = 1e-12;

/// Default absolute slack for partial-order (PSD) comparisons; scaled by the
/// operand norms at the call site.
inline constexpr double kPsdSlack = 1e-10;

struct SpdCheck {
  bool ok = false;
  double min_eig = 0.0;
  double max_eig = 0.0;
  std::string reason;
};

inline double sym_norm(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Validates symmetry, a successful Cholesky factorization and a minimum
/// eigenvalue of at least kSpdRelTol times the spectral norm.
inline SpdCheck check_spd(const Eigen::MatrixXd& m) {
  SpdCheck out;
  if (m.rows() != m.cols() || m.rows() == 0) {
    out.reason = "matrix is not square";
    return out;
  }
  const double scale = sym_norm(m);
  if (!m.isApprox(m.transpose(), 1e-12)) {
    out.reason = "matrix is not symmetric";
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  out.min_eig = es.eigenvalues().minCoeff();
  out.max_eig = es.eigenvalues().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    out.reason = "Cholesky factorization failed";
    return out;
  }
  if (out.min_eig < kSpdRelTol * std::max(out.max_eig, scale)) {
    out.reason = "minimum eigenvalue below positive-definite floor";
    return out;
  }
  out.ok = true;
  return out;
}

inline bool is_spd(const Eigen::MatrixXd& m) { return check_spd(m).ok; }

inline void require_spd(const Eigen::MatrixXd& m, const std::string& what) {
  SpdCheck c = check_spd(m);
  if (!c.ok) throw precondition_error(what + ": " + c.reason);
}

/// Smallest eigenvalue of the symmetric part of m.
inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// Tests A <= B in the positive-semidefinite order, allowing the given
/// absolute slack on the smallest eigenvalue of B - A.
inline bool psd_less_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           double slack) {
  return min_eigenvalue(b - a) >= -slack;
}

/// PSD comparison with slack kPsdSlack scaled by the larger operand norm.
inline bool psd_less_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double scale = std::max({sym_norm(a), sym_norm(b), 1.0});
  return psd_less_equal(a, b, kPsdSlack * scale);
}

/// Combined block of a parallel bundle: (sum of inverses)^-1.
inline Eigen::MatrixXd parallel_combine(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw precondition_error("parallel_combine: empty bundle");
  const Eigen::Index k = blocks.front().rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  for (const auto& b : blocks) {
    if (b.rows() != k || b.cols() != k)
      throw precondition_error("parallel_combine: mismatched block sizes");
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success)
      throw precondition_error("parallel_combine: block is not positive definite");
    acc += llt.solve(Eigen::MatrixXd::Identity(k, k));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(acc);
  Eigen::MatrixXd out = llt.solve(Eigen::MatrixXd::Identity(k, k));
  return 0.5 * (out + out.transpose());
}

/// Smallest generalized eigenvalue of (A, B) with B positive definite, i.e.
/// the largest t such that t*B <= A in the PSD order.
inline double generalized_min_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success)
    throw precondition_error("generalized_min_eig: B is not positive definite");
  Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd w = l.triangularView<Eigen::Lower>().solve(a);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  return min_eigenvalue(w);
}

}  // namespace relnet
