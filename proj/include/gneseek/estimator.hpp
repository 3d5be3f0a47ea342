#pragma once

#include "gneseek/common.hpp"
#include "gneseek/rng.hpp"

#include <cmath>
#include <functional>

namespace gneseek {

// One-point gradient estimation.  A player only ever observes the value of
// its cost at the committed, perturbed play x = z + delta*u with u uniform on
// the unit sphere; (dim/delta) * value * u is then an unbiased estimate of the
// gradient of the delta-smoothed cost at z.

inline Vec sample_sphere(int dim, RngStream& rng) {
  if (dim <= 0) throw DimensionMismatch("sample_sphere: dim must be positive");
  Vec v = rng.gaussian_vector(dim);
  double n = v.norm();
  while (n < 1e-12) {  // essentially impossible, but keeps the postcondition exact
    v = rng.gaussian_vector(dim);
    n = v.norm();
  }
  return v / n;
}

inline Vec sample_ball(int dim, RngStream& rng) {
  Vec u = sample_sphere(dim, rng);
  return std::pow(rng.uniform(), 1.0 / dim) * u;
}

inline Vec estimate_cost_gradient(double value, int dim, double delta, const Vec& u) {
  if (u.size() != dim) throw DimensionMismatch("estimate_cost_gradient: direction dimension");
  if (!(delta > 0.0)) throw DimensionMismatch("estimate_cost_gradient: delta must be positive");
  return (dim / delta) * value * u;
}

// m x dim estimate of the constraint Jacobian from one vector observation:
// rows are the per-constraint one-point estimates, i.e. (dim/delta) * g * u^T.
inline Mat estimate_constraint_jacobian(const Vec& values, int dim, double delta, const Vec& u) {
  if (u.size() != dim) throw DimensionMismatch("estimate_constraint_jacobian: direction dimension");
  if (!(delta > 0.0)) throw DimensionMismatch("estimate_constraint_jacobian: delta must be positive");
  return (dim / delta) * values * u.transpose();
}

// Monte Carlo estimate of the smoothed value E_{v in unit ball}[f(z + delta v)].
// Test instrumentation: production code never smooths explicitly.
inline double smoothed_value(const std::function<double(const Vec&)>& f, const Vec& z,
                             double delta, long n_samples, RngStream& rng) {
  if (!(delta > 0.0) || n_samples <= 0)
    throw DimensionMismatch("smoothed_value: need delta > 0 and n_samples > 0");
  double acc = 0.0;
  for (long s = 0; s < n_samples; ++s)
    acc += f(z + delta * sample_ball(static_cast<int>(z.size()), rng));
  return acc / static_cast<double>(n_samples);
}

}  // namespace gneseek
