#pragma once

#include "gneseek/common.hpp"

#include <array>
#include <cmath>
#include <string>

namespace gneseek {

// Power-law step-size and perturbation schedules.
//
// Delay-free variant, round t >= 1:
//   alpha_t = t^-a1   (mirror-step weight)
//   beta_t  = t^-a2   (dual regularization)
//   gamma_t = t^-(1-a2)  (dual step)
//   delta_t = r_min * t^-a3  (perturbation radius)
//   eta_t   = t^-a3   (set shrink factor)
// Delayed variant with lag tau: alpha, beta, gamma are 1 for t <= tau and
// follow (t - tau)-power laws afterwards; delta and eta stay on the t clock.
//
// Admissibility: a1 - 2 a2 - 2 a3 > 0 and a2 < a3 always; a1 < 1/2 is required
// only for the delay-free variant.

enum class Variant { DelayFree, Delayed };

class Schedule {
 public:
  struct Values {
    double alpha, beta, gamma, delta, eta;
  };

  Schedule(double a1, double a2, double a3, double r_min, Variant variant = Variant::DelayFree,
           long tau = 0)
      : a1_(a1), a2_(a2), a3_(a3), r_min_(r_min), variant_(variant), tau_(tau) {
    auto fail = [](const std::string& msg) { throw InvalidExponents(msg); };
    if (!(a1 >= 0.0 && a1 <= 1.0 && a2 >= 0.0 && a2 <= 1.0 && a3 >= 0.0 && a3 <= 1.0))
      fail("exponents must lie in [0, 1]");
    if (!(a2 < a3))
      fail("requires a2 < a3 (got a2=" + std::to_string(a2) + ", a3=" + std::to_string(a3) + ")");
    if (!(a1 - 2.0 * a2 - 2.0 * a3 > 0.0))
      fail("requires a1 - 2*a2 - 2*a3 > 0 (got a1=" + std::to_string(a1) +
           ", a2=" + std::to_string(a2) + ", a3=" + std::to_string(a3) + ")");
    if (variant == Variant::DelayFree && !(a1 < 0.5))
      fail("delay-free variant requires a1 < 0.5 (got a1=" + std::to_string(a1) + ")");
    if (variant == Variant::DelayFree && tau != 0)
      fail("delay-free variant must have tau = 0");
    if (tau < 0) fail("tau must be nonnegative");
    if (!(r_min > 0.0)) fail("r_min must be positive");
  }

  Values at(long t) const {
    if (t < 1) throw InvalidExponents("schedules are defined for rounds t >= 1");
    double td = static_cast<double>(t);
    Values v;
    v.delta = r_min_ * std::pow(td, -a3_);
    v.eta = std::pow(td, -a3_);
    if (variant_ == Variant::Delayed && t <= tau_) {
      v.alpha = v.beta = v.gamma = 1.0;
    } else {
      double s = variant_ == Variant::Delayed ? static_cast<double>(t - tau_) : td;
      v.alpha = std::pow(s, -a1_);
      v.beta = std::pow(s, -a2_);
      v.gamma = std::pow(s, -(1.0 - a2_));
    }
    return v;
  }

  // gamma with the index-0 convention used by the consensus envelope.
  double gamma_at(long t) const { return t < 1 ? 1.0 : at(t).gamma; }

  double a1() const { return a1_; }
  double a2() const { return a2_; }
  double a3() const { return a3_; }
  double r_min() const { return r_min_; }
  long tau() const { return tau_; }
  Variant variant() const { return variant_; }

  // Exponent triple (a1, a2, a3) that balances the regret and violation rates
  // for the delay-free algorithm: a1 = 3/7 + 4 a2 / 7 and a3 = (1 - a2) / 7
  // with the dual regularization exponent a2 driven to zero.
  static std::array<double, 3> corollary2_exponents() {
    return {3.0 / 7.0, 0.0, 1.0 / 7.0};
  }

 private:
  double a1_, a2_, a3_, r_min_;
  Variant variant_;
  long tau_;
};

}  // namespace gneseek
