#pragma once

#include "gneseek/common.hpp"
#include "gneseek/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gneseek {

// Per-player feasible set: an axis-aligned box or a euclidean ball.  Each set
// carries an interior anchor point (its center), the radius of the largest
// ball around that anchor that stays inside the set, and the radius of a ball
// around the origin that contains the set.  Shrinking contracts the set toward
// its own center; with eta in [0,1] the shrunk set always contains the center
// and shrink(1) collapses to it.  That matters because plays are committed as
// z + delta*u with z in the shrunk set, and the shrink margin is what keeps
// the perturbed play feasible.
class StrategySet {
 public:
  enum class Kind { Box, Ball };

  static StrategySet box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw DimensionMismatch("box bounds must be non-empty and share a dimension");
    for (int k = 0; k < lower.size(); ++k)
      if (!(lower[k] < upper[k]))
        throw DimensionMismatch("box needs lower < upper in every coordinate");
    StrategySet s;
    s.kind_ = Kind::Box;
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    s.center_ = 0.5 * (s.lower_ + s.upper_);
    s.inner_radius_ = 0.5 * (s.upper_ - s.lower_).minCoeff();
    double r2 = 0.0;
    for (int k = 0; k < s.lower_.size(); ++k) {
      double m = std::max(std::abs(s.lower_[k]), std::abs(s.upper_[k]));
      r2 += m * m;
    }
    s.outer_radius_ = std::sqrt(r2);
    return s;
  }

  static StrategySet ball(Vec center, double radius) {
    if (center.size() == 0) throw DimensionMismatch("ball center must be non-empty");
    if (!(radius > 0.0)) throw DimensionMismatch("ball radius must be positive");
    StrategySet s;
    s.kind_ = Kind::Ball;
    s.center_ = std::move(center);
    s.radius_ = radius;
    s.inner_radius_ = radius;
    s.outer_radius_ = s.center_.norm() + radius;
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  double inner_radius() const { return inner_radius_; }
  double outer_radius() const { return outer_radius_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  double radius() const { return radius_; }

  double diameter() const {
    return kind_ == Kind::Box ? (upper_ - lower_).norm() : 2.0 * radius_;
  }

  Vec project(const Vec& p) const {
    if (p.size() != center_.size()) throw DimensionMismatch("project: wrong dimension");
    if (kind_ == Kind::Box) return p.cwiseMax(lower_).cwiseMin(upper_);
    Vec d = p - center_;
    double n = d.norm();
    if (n <= radius_) return p;
    return center_ + (radius_ / n) * d;
  }

  double distance(const Vec& p) const { return (p - project(p)).norm(); }

  bool contains(const Vec& p, double tol = 0.0) const { return distance(p) <= tol; }

  // Contract toward the center by factor (1 - eta).  The result of shrinking
  // may be degenerate (eta = 1 gives the single point {center}), which is
  // deliberately representable: round 1 of the learner uses exactly that set.
  StrategySet shrink(double eta) const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DimensionMismatch("shrink: eta must lie in [0,1]");
    StrategySet s = *this;
    double f = 1.0 - eta;
    if (kind_ == Kind::Box) {
      s.lower_ = center_ - f * (center_ - lower_);
      s.upper_ = center_ + f * (upper_ - center_);
    } else {
      s.radius_ = f * radius_;
    }
    s.inner_radius_ = f * inner_radius_;
    // The outer radius can only decrease under contraction; recompute for boxes.
    if (kind_ == Kind::Box) {
      double r2 = 0.0;
      for (int k = 0; k < s.lower_.size(); ++k) {
        double m = std::max(std::abs(s.lower_[k]), std::abs(s.upper_[k]));
        r2 += m * m;
      }
      s.outer_radius_ = std::sqrt(r2);
    } else {
      s.outer_radius_ = s.center_.norm() + s.radius_;
    }
    return s;
  }

  // Uniform sample (used for the round-1 point and for feasibility probes).
  Vec sample_uniform(RngStream& rng) const {
    if (kind_ == Kind::Box) {
      Vec p(dim());
      for (int k = 0; k < dim(); ++k) p[k] = rng.uniform(lower_[k], upper_[k]);
      return p;
    }
    // Direction uniform on the sphere, radius with the |B^n| density.
    Vec dir = rng.gaussian_vector(dim());
    double n = dir.norm();
    while (n < 1e-12) {
      dir = rng.gaussian_vector(dim());
      n = dir.norm();
    }
    double r = radius_ * std::pow(rng.uniform(), 1.0 / dim());
    return center_ + (r / n) * dir;
  }

 private:
  StrategySet() = default;
  Kind kind_ = Kind::Box;
  Vec lower_, upper_, center_;
  double radius_ = 0.0;
  double inner_radius_ = 0.0;
  double outer_radius_ = 0.0;
};

}  // namespace gneseek
