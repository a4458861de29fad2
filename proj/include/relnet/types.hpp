#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace relnet {

/// Dense node identifier in [0, num_nodes).
using NodeId = std::uint32_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();

/// k x k symmetric positive definite block (covariance or resistance).
using Block = Eigen::MatrixXd;

/// Thrown when an operation precondition does not hold.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numeric computation cannot proceed (singular system, ...).
class solve_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on file read/write failures; the message names the path.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relnet
