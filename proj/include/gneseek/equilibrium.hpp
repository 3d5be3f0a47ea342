#pragma once

#include "gneseek/bregman.hpp"
#include "gneseek/common.hpp"
#include "gneseek/game.hpp"
#include "gneseek/rng.hpp"
#include "gneseek/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace gneseek {

// Centralized, full-information ground truth: per-round variational
// equilibria computed by an extragradient iteration over the round's joint
// feasible set (the product of the strategy sets intersected with the shared
// constraint g_t(x) <= 0).  Used for metrics and validation only — the bandit
// learner never touches it.

struct GneSolution {
  double t = 0.0;
  Vec x_star;
  Vec lambda_star;       // multiplier of the shared constraint rows
  double residual = 0.0; // min over feasible probes of F(x*) . (x - x*); >= -tol at a solution
  long iterations = 0;
};

struct SolverOptions {
  double tol = 1e-9;
  long max_iter = 100000;
  long probe_count = 1000;        // feasibility probes for the residual certificate
  std::uint64_t probe_seed = 0x9E3779B9ULL;
};

namespace detail {

// Joint feasible set of one round with the shared constraint reconstructed in
// affine form A x + c <= 0 from the per-player evaluators.
struct CoupledSet {
  const GameSpec* game = nullptr;
  double t = 0.0;
  Mat a;   // m x total_dim
  Vec c;   // m
  mutable double last_multiplier = 0.0;  // nu of the most recent projection (m = 1)

  bool vacuous(int row) const { return a.row(row).norm() == 0.0; }

  Vec project_products(const Vec& y) const {
    Vec out(y.size());
    for (int i = 0; i < game->n_players; ++i)
      game->set_block(out, i, game->sets[i].project(game->block(y, i)));
    return out;
  }

  // Projection onto (product of sets) intersected with one affine row via
  // bisection on the row's multiplier; multi-row sets fall back to cyclic
  // alternating corrections (Dykstra).
  Vec project(const Vec& y) const {
    last_multiplier = 0.0;
    std::vector<int> active;
    for (int r = 0; r < game->m; ++r)
      if (!vacuous(r)) active.push_back(r);
    if (active.empty()) return project_products(y);
    if (active.size() == 1) return project_one_row(y, active[0]);
    return project_dykstra(y, active);
  }

  Vec project_one_row(const Vec& y, int row) const {
    Vec ar = a.row(row).transpose();
    auto value = [&](double nu) {
      Vec p = project_products(y - nu * ar);
      return ar.dot(p) + c[row];
    };
    if (value(0.0) <= 1e-14) return project_products(y);
    // Bracket: h(nu) is non-increasing; grow until the constraint flips sign.
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200 && value(hi) > 0.0; ++k) hi *= 2.0;
    if (value(hi) > 0.0) throw NoConvergence("coupled projection: constraint cannot be met");
    for (int k = 0; k < 200; ++k) {
      double mid = 0.5 * (lo + hi);
      if (value(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-15 * (1.0 + hi)) break;
    }
    last_multiplier = hi;
    return project_products(y - hi * ar);
  }

  Vec project_dykstra(const Vec& y, const std::vector<int>& rows) const {
    Vec x = y;
    Vec p_prod = Vec::Zero(y.size());
    std::vector<Vec> p_row(rows.size(), Vec::Zero(y.size()));
    for (long it = 0; it < 2000; ++it) {
      Vec prev = x;
      Vec w = x + p_prod;
      Vec px = project_products(w);
      p_prod = w - px;
      x = px;
      for (size_t k = 0; k < rows.size(); ++k) {
        Vec w2 = x + p_row[k];
        Vec ar = a.row(rows[k]).transpose();
        double viol = ar.dot(w2) + c[rows[k]];
        Vec hx = viol > 0.0 ? Vec(w2 - (viol / ar.squaredNorm()) * ar) : w2;
        p_row[k] = w2 - hx;
        x = hx;
      }
      if ((x - prev).norm() <= 1e-13) break;
    }
    return x;
  }

  bool feasible(const Vec& x, double tol) const {
    for (int i = 0; i < game->n_players; ++i)
      if (!game->sets[i].contains(game->block(x, i), tol)) return false;
    return ((a * x + c).array() <= tol).all();
  }
};

inline CoupledSet make_coupled_set(const GameSpec& g, double t) {
  if (!g.constraint_jacobian) throw MissingGradients("game exposes no constraint jacobians");
  CoupledSet cs;
  cs.game = &g;
  cs.t = t;
  cs.a = Mat::Zero(g.m, g.total_dim());
  cs.c = Vec::Zero(g.m);
  for (int i = 0; i < g.n_players; ++i) {
    const Vec& ctr = g.sets[i].center();
    Mat ji = g.constraint_jacobian(i, t, ctr);
    if (ji.rows() != g.m || ji.cols() != g.dims[i])
      throw DimensionMismatch("constraint jacobian must be m x n_i");
    cs.a.block(0, g.offset(i), g.m, g.dims[i]) = ji;
    cs.c += g.constraint(i, t, ctr) - ji * ctr;
  }
  return cs;
}

}  // namespace detail

// Extragradient solve of the round-t variational problem.  Requires analytic
// gradients and a monotone pseudo-gradient; strong monotonicity makes the
// solution unique, which the two-start acceptance check verifies empirically.
inline GneSolution solve_gne(const GameSpec& g, double t, const SolverOptions& opt = {},
                             const Vec* warm_start = nullptr) {
  if (!g.has_gradients()) throw MissingGradients("solve_gne needs analytic gradients");
  if (g.mono_mu < 0.0) throw NotStronglyMonotone("pseudo-gradient must be monotone");

  detail::CoupledSet cs = detail::make_coupled_set(g, t);

  // Spot-check that the shared constraint really is affine: the reconstructed
  // model must reproduce the evaluators away from the reconstruction point.
  for (int i = 0; i < g.n_players; ++i) {
    const StrategySet& s = g.sets[i];
    Vec probe = s.project(s.center() + Vec::Constant(g.dims[i], 0.37 * s.inner_radius()));
    Vec want = g.constraint(i, t, probe);
    Vec got = cs.a.block(0, g.offset(i), g.m, g.dims[i]) * (probe - s.center()) +
              g.constraint(i, t, s.center());
    if ((want - got).norm() > 1e-8 * (1.0 + want.norm()))
      throw NoConvergence("shared constraint is not affine; the solver cannot project onto it");
  }

  Vec x(g.total_dim());
  if (warm_start && warm_start->size() == g.total_dim()) {
    x = *warm_start;
  } else {
    for (int i = 0; i < g.n_players; ++i) g.set_block(x, i, g.sets[i].center());
  }
  x = cs.project(x);

  // Step size: safe for the certified Lipschitz constant; for (near-)constant
  // maps scale by the geometry instead.
  double diam = 0.0;
  for (const auto& s : g.sets) diam += s.diameter() * s.diameter();
  diam = std::sqrt(diam);
  double gamma = g.lip_grad > 1e-12 ? 0.4 / g.lip_grad
                                    : (1.0 + diam) / (1.0 + g.pseudo_gradient(t, x).norm());

  long it = 0;
  double nu = 0.0;
  for (; it < opt.max_iter; ++it) {
    Vec y = cs.project(x - gamma * g.pseudo_gradient(t, x));
    Vec x_next = cs.project(x - gamma * g.pseudo_gradient(t, y));
    nu = cs.last_multiplier;
    double move = (x_next - x).norm();
    x = x_next;
    if (move <= opt.tol) break;
  }
  if (it >= opt.max_iter)
    throw NoConvergence("extragradient did not reach the requested tolerance");

  GneSolution sol;
  sol.t = t;
  sol.x_star = x;
  sol.iterations = it + 1;
  // Multiplier of the shared rows, recovered from the final projection step:
  // on unclamped coordinates x* = x* - gamma F - nu a, so lambda* = nu / gamma.
  sol.lambda_star = Vec::Zero(g.m);
  if (g.m == 1 && !cs.vacuous(0)) sol.lambda_star[0] = nu / gamma;

  // Residual certificate over random feasible probes: uniform draws from the
  // product set, pushed onto the shared constraint when they land outside it.
  // Projection keeps the probe cost bounded even when the feasible volume is
  // a sliver of the product set, and it lands probes near the binding facet,
  // which is exactly where a bad solution shows up.
  if (opt.probe_count > 0) {
    RngStream rng = RngStream::derive(opt.probe_seed,
                                      {static_cast<std::uint64_t>(std::llround(t * 4096.0))});
    Vec fstar = g.pseudo_gradient(t, x);
    double worst = std::numeric_limits<double>::infinity();
    Vec p(g.total_dim());
    for (long k = 0; k < opt.probe_count; ++k) {
      for (int i = 0; i < g.n_players; ++i) g.set_block(p, i, g.sets[i].sample_uniform(rng));
      if (!((cs.a * p + cs.c).array() <= 1e-12).all()) p = cs.project(p);
      worst = std::min(worst, fstar.dot(p - x));
    }
    sol.residual = worst;
  }
  return sol;
}

// Warm-started per-round trajectory for t = 1..count.
inline std::vector<GneSolution> gne_trajectory(const GameSpec& g, long count,
                                               const SolverOptions& opt = {}) {
  std::vector<GneSolution> out;
  out.reserve(count);
  const Vec* warm = nullptr;
  for (long t = 1; t <= count; ++t) {
    out.push_back(solve_gne(g, static_cast<double>(t), opt, warm));
    warm = &out.back().x_star;
  }
  return out;
}

// Tangent-cone KKT residual at a solution: the per-player stationarity
// gradient, with components pointing out of the box at active bounds removed.
inline double kkt_residual(const GameSpec& g, const GneSolution& sol) {
  if (!g.has_gradients()) throw MissingGradients("kkt_residual needs analytic gradients");
  double worst = 0.0;
  for (int i = 0; i < g.n_players; ++i) {
    Vec xi = g.block(sol.x_star, i);
    Vec r = g.cost_gradient(i, sol.t, sol.x_star) +
            g.constraint_jacobian(i, sol.t, xi).transpose() * sol.lambda_star;
    const StrategySet& s = g.sets[i];
    if (s.kind() == StrategySet::Kind::Box) {
      for (int k = 0; k < r.size(); ++k) {
        bool at_lo = xi[k] <= s.lower()[k] + 1e-9;
        bool at_hi = xi[k] >= s.upper()[k] - 1e-9;
        if (at_lo && r[k] > 0.0) r[k] = 0.0;
        if (at_hi && r[k] < 0.0) r[k] = 0.0;
      }
    } else {
      double rad = (xi - s.center()).norm();
      if (rad >= s.radius() - 1e-9 && rad > 0.0) {
        Vec nrm = (xi - s.center()) / rad;
        double outward = -r.dot(nrm);
        if (outward > 0.0) r += outward * nrm;  // remove the blocked direction
      }
    }
    worst = std::max(worst, r.norm());
  }
  return worst;
}

// One step of the full-information centralized baseline: every player mirrors
// against its analytic gradient over the *unshrunk* set, and a single shared
// multiplier ascends on the aggregated constraint.
inline std::pair<Vec, Vec> centralized_baseline_step(const GameSpec& g, double t, const Vec& x,
                                                     const Vec& lambda,
                                                     const Schedule::Values& sv,
                                                     const Mirror& mirror) {
  if (!g.has_gradients()) throw MissingGradients("the centralized baseline needs gradients");
  if (lambda.size() != g.m) throw DimensionMismatch("baseline multiplier has wrong length");
  Vec x_next(g.total_dim());
  for (int i = 0; i < g.n_players; ++i) {
    Vec xi = g.block(x, i);
    Vec grad = g.cost_gradient(i, t, x) + g.constraint_jacobian(i, t, xi).transpose() * lambda;
    g.set_block(x_next, i, mirror.mirror_step(g.sets[i], xi, grad, sv.alpha));
  }
  Vec lam_next = clip_nonnegative(lambda + sv.gamma * (g.stack_sum_constraint(t, x) -
                                                       sv.beta * lambda));
  return {x_next, lam_next};
}

}  // namespace gneseek
