#pragma once

#include "gneseek/common.hpp"
#include "gneseek/game.hpp"

#include <algorithm>
#include <cmath>

namespace gneseek {

// Time-varying Nash–Cournot benchmark: 20 firms, scalar production levels in
// [0, 30], a sinusoidal market phase s(t) = sin(t/12), and a shared capacity
// constraint sum_i x_i <= sum_i (10 + s(t)), split per firm as
// g_i(x_i) = x_i - (10 + s(t)).
//
// Firm i (1-based firm number q = i + 1) pays
//   f_i(x) = x_i (s + 1) - (21 + q/9 - 0.5 q s - sum_j x_j),
// i.e. a linear production cost minus the prevailing unit price.  The own
// derivative of this cost is the constant s + 2, so its pseudo-gradient map is
// constant in x: the variational equilibrium of the implemented cost sits at
// the zero-production corner every round.  A commonly quoted closed-form
// target for this benchmark is instead
//   xi_q(t) = (q - 10)/9 + (10 - q) s(t) / 2,  clamped to [0, 30];
// cournot_closed_form_gne returns that clamped profile so runs can report the
// gap between the two notions side by side instead of silently picking one.

struct CournotParams {
  int n_players = 20;
  double box_lo = 0.0;
  double box_hi = 30.0;
  double base_capacity = 10.0;  // per-firm capacity 10 + s(t)
};

inline double cournot_phase(double t) { return std::sin(t / 12.0); }

inline GameSpec cournot_game(const CournotParams& p = {}) {
  GameSpec g;
  g.n_players = p.n_players;
  g.dims.assign(p.n_players, 1);
  g.m = 1;
  g.name = "cournot";
  for (int i = 0; i < p.n_players; ++i)
    g.sets.push_back(StrategySet::box(Vec::Constant(1, p.box_lo), Vec::Constant(1, p.box_hi)));

  const int n = p.n_players;
  const double cap = p.base_capacity;

  g.cost = [n](int i, double t, const Vec& x) {
    double s = cournot_phase(t);
    double q = i + 1.0;
    double price = 21.0 + q / 9.0 - 0.5 * q * s - x.sum();
    return x[i] * (s + 1.0) - price;
  };
  g.cost_gradient = [](int, double t, const Vec&) {
    Vec d(1);
    d[0] = cournot_phase(t) + 2.0;
    return d;
  };
  g.constraint = [cap](int, double t, const Vec& xi) {
    Vec out(1);
    out[0] = xi[0] - (cap + cournot_phase(t));
    return out;
  };
  g.constraint_jacobian = [](int, double, const Vec&) { return Mat(Mat::Ones(1, 1)); };

  // Interval bounds over the box and the sinusoid range s in [-1, 1]:
  //   price intercept c_q(s) = 21 + q/9 - q s / 2 lies in
  //   [21 - 7q/18, 21 + 11q/18], extremal at q = n.
  double c_min = 21.0 - 7.0 * n / 18.0;
  double c_max = 21.0 + 11.0 * n / 18.0;
  double f_max = p.box_hi * 2.0 + n * p.box_hi - c_min;
  double f_min = -c_max;  // all production at the lower box corner
  g.bound_x = p.box_hi * std::sqrt(static_cast<double>(n));
  g.bound_f = std::max(std::abs(f_max), std::abs(f_min));
  g.bound_g = std::max(p.box_hi - (cap - 1.0), (cap + 1.0) - p.box_lo);
  g.lip_f = 3.0;  // |s + 2| <= 3
  g.lip_g = 1.0;
  g.mono_mu = 0.0;   // constant pseudo-gradient: monotone but not strongly so
  g.lip_grad = 0.0;
  return g;
}

// Clamped closed-form target profile (see the note above).
inline Vec cournot_closed_form_gne(double t, const CournotParams& p = {}) {
  double s = cournot_phase(t);
  Vec x(p.n_players);
  for (int i = 0; i < p.n_players; ++i) {
    double q = i + 1.0;
    double xi = (q - 10.0) / 9.0 + 0.5 * (10.0 - q) * s;
    x[i] = std::clamp(xi, p.box_lo, p.box_hi);
  }
  return x;
}

}  // namespace gneseek
