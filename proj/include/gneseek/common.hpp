#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gneseek {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy. Everything thrown by the library derives from Error so
// callers can catch one type at the tool boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct EmptyGraph : Error { using Error::Error; };
struct DisconnectedGraph : Error { using Error::Error; };
struct NonStochastic : Error { using Error::Error; };
struct InvalidExponents : Error { using Error::Error; };
struct StepNotConverged : Error { using Error::Error; };
struct InfeasibleAnchor : Error { using Error::Error; };
struct NotStronglyMonotone : Error { using Error::Error; };
struct MissingGradients : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct BufferUnderflow : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

inline Vec clip_nonnegative(const Vec& v) { return v.cwiseMax(0.0); }

}  // namespace gneseek
