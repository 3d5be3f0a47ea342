#pragma once

#include "gneseek/common.hpp"
#include "gneseek/strategy_set.hpp"

#include <cmath>
#include <functional>
#include <utility>

namespace gneseek {

// Mirror map and its Bregman divergence
//   D(a, b) = phi(a) - phi(b) - <grad phi(b), a - b>.
// The euclidean kind (phi = ||.||^2 / 2) admits a closed-form mirror step:
// a projection of a plain gradient step.  Custom kinds solve the step's
// strongly convex subproblem with projected gradient descent.
class Mirror {
 public:
  using Fn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  static Mirror euclidean() {
    Mirror m;
    m.euclidean_ = true;
    m.strong_convexity_ = 1.0;
    return m;
  }

  // strong_convexity is the modulus of phi; lipschitz_k, when positive,
  // overrides the divergence growth constant used in D(a,b) <= K ||a-b||.
  static Mirror custom(Fn phi, GradFn grad_phi, double strong_convexity, double lipschitz_k = 0.0) {
    if (!phi || !grad_phi) throw DimensionMismatch("custom mirror needs phi and its gradient");
    if (!(strong_convexity > 0.0))
      throw DimensionMismatch("mirror strong convexity must be positive");
    Mirror m;
    m.euclidean_ = false;
    m.phi_ = std::move(phi);
    m.grad_phi_ = std::move(grad_phi);
    m.strong_convexity_ = strong_convexity;
    m.lipschitz_k_ = lipschitz_k;
    return m;
  }

  bool is_euclidean() const { return euclidean_; }
  double strong_convexity() const { return strong_convexity_; }

  // Growth constant K with D(a,b) <= K ||a-b|| over the given set; for the
  // euclidean kind the set diameter works since D = ||a-b||^2 / 2.
  double lipschitz_k(const StrategySet& s) const {
    if (lipschitz_k_ > 0.0) return lipschitz_k_;
    return s.diameter();
  }

  double divergence(const Vec& a, const Vec& b) const {
    if (a.size() != b.size()) throw DimensionMismatch("divergence: dimension mismatch");
    if (euclidean_) return 0.5 * (a - b).squaredNorm();
    return phi_(a) - phi_(b) - grad_phi_(b).dot(a - b);
  }

  Vec grad_phi(const Vec& x) const {
    if (euclidean_) return x;
    return grad_phi_(x);
  }

  // argmin_{w in S} alpha <w, grad> + D(w, z).
  //
  // The anchor z must lie in S (within 1e-9); the output is always feasible.
  // Custom mirrors run projected gradient descent with backtracking until the
  // unit-step fixed-point residual drops below `tol`.
  Vec mirror_step(const StrategySet& s, const Vec& z, const Vec& grad, double alpha,
                  double tol = 1e-9, long max_iter = 10000) const {
    if (z.size() != s.dim() || grad.size() != s.dim())
      throw DimensionMismatch("mirror_step: dimension mismatch");
    if (s.distance(z) > 1e-9) throw InfeasibleAnchor("mirror_step: anchor lies outside the set");
    if (euclidean_) return s.project(z - alpha * grad);

    // Custom mirrors: projected gradient with a monotone curvature estimate.
    // Steps are certified through gradient secants rather than objective
    // values, so floating-point noise in phi cannot stall the iteration near
    // the optimum (a value-based line search bottoms out at ~sqrt(eps)).
    // Note grad_obj(a) - grad_obj(b) = grad_phi(a) - grad_phi(b): the secant
    // measures the curvature of phi itself.
    const Vec gz = grad_phi_(z);
    auto gradient = [&](const Vec& w) { return Vec(alpha * grad + grad_phi_(w) - gz); };

    Vec w = s.project(z);
    Vec gw = gradient(w);
    double lip = strong_convexity_;  // curvature of phi is at least the convexity modulus
    const double lip_cap = 1e12 * strong_convexity_;
    for (long it = 0; it < max_iter; ++it) {
      if ((w - s.project(w - gw)).norm() <= tol) return w;
      Vec trial = s.project(w - (1.0 / lip) * gw);
      double dn = (trial - w).norm();
      if (dn == 0.0) return w;  // exact fixed point of the projected step
      Vec gt = gradient(trial);
      double secant = (gt - gw).norm() / dn;
      if (secant > lip * (1.0 + 1e-10)) {
        // Step too long for the observed curvature: raise the estimate and
        // retry.  The estimate never decreases, so steps only shrink and the
        // projected iteration stays a contraction once the estimate is safe.
        lip = std::min(std::max(2.0 * lip, secant), lip_cap);
        if (lip >= lip_cap)
          throw StepNotConverged("mirror_step: mirror map curvature estimate diverged");
        continue;
      }
      w = trial;
      gw = gt;
    }
    if ((w - s.project(w - gw)).norm() <= tol * 10) return w;
    throw StepNotConverged("mirror_step: inner solver exhausted its iteration budget");
  }

 private:
  Mirror() = default;
  bool euclidean_ = true;
  Fn phi_;
  GradFn grad_phi_;
  double strong_convexity_ = 1.0;
  double lipschitz_k_ = 0.0;
};

}  // namespace gneseek
