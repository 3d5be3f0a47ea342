#pragma once

#include "gneseek/common.hpp"
#include "gneseek/strategy_set.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace gneseek {

// A time-varying N-player game with shared affine-style constraints.
//
// Costs take the full stacked profile; per-player constraints take only that
// player's block, and the shared constraint of round t is the sum over players
// g_t(x) = sum_i g_i(t, x_i) <= 0.  Evaluators accept real-valued t so tests
// can probe arbitrary phases; the learner always passes integer rounds.
//
// The *_gradient evaluators are optional: the bandit learner must never call
// them (it sees values only), but the equilibrium solver and the centralized
// baseline require them.
struct GameSpec {
  int n_players = 0;
  std::vector<int> dims;            // block sizes n_i
  int m = 0;                        // number of shared constraint rows
  std::vector<StrategySet> sets;

  std::function<double(int i, double t, const Vec& x_full)> cost;
  std::function<Vec(int i, double t, const Vec& x_i)> constraint;
  std::function<Vec(int i, double t, const Vec& x_full)> cost_gradient;     // d f_i / d x_i
  std::function<Mat(int i, double t, const Vec& x_i)> constraint_jacobian;  // m x n_i

  // Problem constants.  bound_f / bound_g are true sup bounds over the
  // feasible boxes (they gate the runtime dual-boundedness checks), lip_f /
  // lip_g bound gradient norms, mono_mu is the strong-monotonicity modulus of
  // the pseudo-gradient (0 = merely monotone) and lip_grad its Lipschitz
  // constant.
  double bound_x = 0.0;
  double bound_f = 0.0;
  double bound_g = 0.0;
  double lip_f = 0.0;
  double lip_g = 0.0;
  double mono_mu = 0.0;
  double lip_grad = 0.0;
  std::string name;

  int total_dim() const { return std::accumulate(dims.begin(), dims.end(), 0); }

  int offset(int i) const {
    int o = 0;
    for (int k = 0; k < i; ++k) o += dims[k];
    return o;
  }

  Vec block(const Vec& x, int i) const { return x.segment(offset(i), dims[i]); }

  void set_block(Vec& x, int i, const Vec& v) const { x.segment(offset(i), dims[i]) = v; }

  bool has_gradients() const {
    return static_cast<bool>(cost_gradient) && static_cast<bool>(constraint_jacobian);
  }

  // Minimal interior radius across players; the perturbation schedule scales
  // with it so every perturbed play stays feasible.
  double min_inner_radius() const {
    double r = sets.empty() ? 0.0 : sets[0].inner_radius();
    for (const auto& s : sets) r = std::min(r, s.inner_radius());
    return r;
  }

  Vec stack_sum_constraint(double t, const Vec& x_full) const {
    Vec g = Vec::Zero(m);
    for (int i = 0; i < n_players; ++i) g += constraint(i, t, block(x_full, i));
    return g;
  }

  Vec pseudo_gradient(double t, const Vec& x_full) const {
    if (!cost_gradient) throw MissingGradients("game exposes no analytic cost gradients");
    Vec f(total_dim());
    for (int i = 0; i < n_players; ++i) f.segment(offset(i), dims[i]) = cost_gradient(i, t, x_full);
    return f;
  }
};

// ---------------------------------------------------------------------------
// Quadratic test game: f_i(x) = ||x_i - c_i(t)||^2 / 2 + coupling * x_i . sum_{j != i} x_j.
// The pseudo-gradient is the affine map (I + coupling (E - I) (x) I_d) x - c(t),
// so strong monotonicity is certified exactly from the eigenvalues.
// ---------------------------------------------------------------------------

struct QuadraticGameOptions {
  std::vector<Vec> targets;     // c_i base values; default: all-ones per player
  double target_wobble = 0.0;   // c_i(t) = base_i + wobble * sin(t/period) * 1
  double target_period = 50.0;
  double box_halfwidth = 5.0;   // sets are [-h, h]^dim
  double sum_cap = 0.0;         // if > 0: shared constraint sum_i 1^T x_i <= sum_cap (m = 1)
};

inline GameSpec quadratic_test_game(int n_players, int dim, double coupling, double strength,
                                    QuadraticGameOptions opt = {}) {
  if (n_players <= 0 || dim <= 0)
    throw DimensionMismatch("quadratic_test_game: players and dim must be positive");
  if (!(strength > 0.0)) throw NotStronglyMonotone("requested modulus must be positive");

  // Eigenvalues of I + coupling (E - I): 1 + coupling (N-1) and 1 - coupling.
  Mat jac = Mat::Identity(n_players, n_players);
  for (int i = 0; i < n_players; ++i)
    for (int j = 0; j < n_players; ++j)
      if (i != j) jac(i, j) = coupling;
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  double mu = es.eigenvalues().minCoeff();
  double lip = std::abs(es.eigenvalues()[0]);
  for (int k = 0; k < n_players; ++k) lip = std::max(lip, std::abs(es.eigenvalues()[k]));
  if (mu < strength)
    throw NotStronglyMonotone("pseudo-gradient eigenvalue margin below the requested modulus");

  GameSpec g;
  g.n_players = n_players;
  g.dims.assign(n_players, dim);
  g.name = "quadratic";
  double h = opt.box_halfwidth;
  for (int i = 0; i < n_players; ++i)
    g.sets.push_back(StrategySet::box(Vec::Constant(dim, -h), Vec::Constant(dim, h)));

  std::vector<Vec> base = opt.targets;
  if (base.empty()) base.assign(n_players, Vec::Ones(dim));
  if (static_cast<int>(base.size()) != n_players)
    throw DimensionMismatch("quadratic_test_game: one target per player required");
  double wob = opt.target_wobble, period = opt.target_period;
  auto target = [base, wob, period](int i, double t) {
    return Vec(base[i] + Vec::Constant(base[i].size(), wob * std::sin(t / period)));
  };

  g.cost = [g_dims = g.dims, target, coupling, n_players, dim](int i, double t, const Vec& x) {
    int off = 0;
    for (int k = 0; k < i; ++k) off += g_dims[k];
    Vec xi = x.segment(off, dim);
    Vec rest = Vec::Zero(dim);
    int o = 0;
    for (int j = 0; j < n_players; ++j) {
      if (j != i) rest += x.segment(o, dim);
      o += dim;
    }
    return 0.5 * (xi - target(i, t)).squaredNorm() + coupling * xi.dot(rest);
  };
  g.cost_gradient = [target, coupling, n_players, dim](int i, double t, const Vec& x) {
    Vec xi = x.segment(i * dim, dim);
    Vec rest = Vec::Zero(dim);
    for (int j = 0; j < n_players; ++j)
      if (j != i) rest += x.segment(j * dim, dim);
    return Vec(xi - target(i, t) + coupling * rest);
  };

  double cap = opt.sum_cap;
  if (cap > 0.0) {
    g.m = 1;
    g.constraint = [n_players, cap](int, double, const Vec& xi) {
      Vec out(1);
      out[0] = xi.sum() - cap / n_players;
      return out;
    };
    g.constraint_jacobian = [dim](int, double, const Vec&) {
      return Mat(Mat::Ones(1, dim));
    };
  } else {
    g.m = 1;  // a vacuous row keeps the dual machinery exercised
    g.constraint = [](int, double, const Vec&) { return Vec(Vec::Zero(1)); };
    g.constraint_jacobian = [dim](int, double, const Vec&) { return Mat(Mat::Zero(1, dim)); };
  }

  // Conservative sup bounds over the feasible boxes.
  double bx_block = h * std::sqrt(static_cast<double>(dim));
  double cmax = 0.0;
  for (const Vec& b : base) cmax = std::max(cmax, b.norm() + std::abs(wob) * std::sqrt(double(dim)));
  g.bound_x = bx_block * std::sqrt(static_cast<double>(n_players));
  g.bound_f = 0.5 * (bx_block + cmax) * (bx_block + cmax) +
              std::abs(coupling) * bx_block * bx_block * (n_players - 1);
  g.bound_g = cap > 0.0 ? h * dim + cap / n_players : 0.0;
  g.lip_f = (bx_block + cmax) + std::abs(coupling) * bx_block * (n_players - 1);
  g.lip_g = cap > 0.0 ? std::sqrt(static_cast<double>(dim)) : 0.0;
  g.mono_mu = mu;
  g.lip_grad = lip;
  return g;
}

// ---------------------------------------------------------------------------
// Scripted game: quadratic family with coefficient schedules from config.
// coef(t) = constant + sum_k amp_k * sin(omega_k t + phase_k) + sum_k poly_k t^k.
// f_i(x) = 0.5 a_i(t) ||x_i||^2 + b_i(t) 1.x_i + cpl(t) x_i . sum_{j!=i} x_j,
// g_i(x_i) row k = w_ik(t) 1.x_i - cap_ik(t).
// ---------------------------------------------------------------------------

struct CoefficientSchedule {
  double constant = 0.0;
  struct Trig { double amplitude = 0.0, omega = 0.0, phase = 0.0; };
  std::vector<Trig> trig;
  std::vector<double> poly;  // poly[k] * t^(k+1)

  double operator()(double t) const {
    double v = constant;
    for (const auto& s : trig) v += s.amplitude * std::sin(s.omega * t + s.phase);
    double p = t;
    for (double c : poly) {
      v += c * p;
      p *= t;
    }
    return v;
  }
};

struct ScriptedGameSpec {
  int n_players = 0;
  int dim = 1;
  double box_halfwidth = 5.0;
  std::vector<CoefficientSchedule> quad;    // a_i(t), one per player
  std::vector<CoefficientSchedule> linear;  // b_i(t), one per player
  CoefficientSchedule coupling;             // cpl(t)
  int m = 0;
  std::vector<std::vector<CoefficientSchedule>> row_weight;  // [i][k]: w_ik(t)
  std::vector<std::vector<CoefficientSchedule>> row_cap;     // [i][k]: cap_ik(t)
  double horizon_hint = 10000.0;  // range over which bounds/monotonicity are certified
};

inline GameSpec scripted_game(const ScriptedGameSpec& s) {
  if (s.n_players <= 0 || s.dim <= 0)
    throw DimensionMismatch("scripted_game: players and dim must be positive");
  if (static_cast<int>(s.quad.size()) != s.n_players ||
      static_cast<int>(s.linear.size()) != s.n_players)
    throw DimensionMismatch("scripted_game: one quad and linear schedule per player");
  if (s.m > 0 && (static_cast<int>(s.row_weight.size()) != s.n_players ||
                  static_cast<int>(s.row_cap.size()) != s.n_players))
    throw DimensionMismatch("scripted_game: constraint tables must cover every player");

  GameSpec g;
  g.n_players = s.n_players;
  g.dims.assign(s.n_players, s.dim);
  g.m = std::max(s.m, 1);
  g.name = "scripted";
  for (int i = 0; i < s.n_players; ++i)
    g.sets.push_back(StrategySet::box(Vec::Constant(s.dim, -s.box_halfwidth),
                                      Vec::Constant(s.dim, s.box_halfwidth)));

  auto spec = s;  // captured by value in the evaluators
  g.cost = [spec](int i, double t, const Vec& x) {
    int dim = spec.dim;
    Vec xi = x.segment(i * dim, dim);
    Vec rest = Vec::Zero(dim);
    for (int j = 0; j < spec.n_players; ++j)
      if (j != i) rest += x.segment(j * dim, dim);
    return 0.5 * spec.quad[i](t) * xi.squaredNorm() + spec.linear[i](t) * xi.sum() +
           spec.coupling(t) * xi.dot(rest);
  };
  g.cost_gradient = [spec](int i, double t, const Vec& x) {
    int dim = spec.dim;
    Vec xi = x.segment(i * dim, dim);
    Vec rest = Vec::Zero(dim);
    for (int j = 0; j < spec.n_players; ++j)
      if (j != i) rest += x.segment(j * dim, dim);
    return Vec(spec.quad[i](t) * xi + Vec::Constant(dim, spec.linear[i](t)) +
               spec.coupling(t) * rest);
  };
  if (s.m > 0) {
    g.constraint = [spec](int i, double t, const Vec& xi) {
      Vec out(spec.m);
      for (int k = 0; k < spec.m; ++k)
        out[k] = spec.row_weight[i][k](t) * xi.sum() - spec.row_cap[i][k](t);
      return out;
    };
    g.constraint_jacobian = [spec](int i, double t, const Vec&) {
      Mat j(spec.m, spec.dim);
      for (int k = 0; k < spec.m; ++k) j.row(k).setConstant(spec.row_weight[i][k](t));
      return j;
    };
  } else {
    g.constraint = [](int, double, const Vec&) { return Vec(Vec::Zero(1)); };
    g.constraint_jacobian = [dim = s.dim](int, double, const Vec&) {
      return Mat(Mat::Zero(1, dim));
    };
  }

  // Certify monotonicity and collect bounds by sweeping sampled times.
  double mu = std::numeric_limits<double>::infinity();
  double lip = 0.0, bf = 0.0, bg = 0.0, lf = 0.0, lg = 0.0;
  double h = s.box_halfwidth;
  double bx_block = h * std::sqrt(static_cast<double>(s.dim));
  for (int step = 0; step <= 64; ++step) {
    double t = 1.0 + (s.horizon_hint - 1.0) * step / 64.0;
    Mat jac(s.n_players, s.n_players);
    for (int i = 0; i < s.n_players; ++i)
      for (int j = 0; j < s.n_players; ++j)
        jac(i, j) = i == j ? s.quad[i](t) : s.coupling(t);
    Eigen::SelfAdjointEigenSolver<Mat> es(jac);
    mu = std::min(mu, es.eigenvalues().minCoeff());
    for (int k = 0; k < s.n_players; ++k) lip = std::max(lip, std::abs(es.eigenvalues()[k]));
    for (int i = 0; i < s.n_players; ++i) {
      double a = std::abs(s.quad[i](t)), b = std::abs(s.linear[i](t)), c = std::abs(s.coupling(t));
      bf = std::max(bf, 0.5 * a * bx_block * bx_block + b * h * s.dim +
                            c * bx_block * bx_block * (s.n_players - 1));
      lf = std::max(lf, a * bx_block + b * std::sqrt(double(s.dim)) +
                            c * bx_block * (s.n_players - 1));
      for (int k = 0; k < s.m; ++k) {
        double w = std::abs(s.row_weight[i][k](t)), cap = std::abs(s.row_cap[i][k](t));
        bg = std::max(bg, w * h * s.dim + cap);
        lg = std::max(lg, w * std::sqrt(double(s.dim)));
      }
    }
  }
  if (mu < 0.0) throw NotStronglyMonotone("scripted game is not monotone over the time sweep");
  g.bound_x = bx_block * std::sqrt(static_cast<double>(s.n_players));
  g.bound_f = bf;
  g.bound_g = std::max(bg, 1e-12);
  g.lip_f = lf;
  g.lip_g = lg;
  g.mono_mu = mu;
  g.lip_grad = lip;
  return g;
}

}  // namespace gneseek
