#pragma once

#include "gneseek/bregman.hpp"
#include "gneseek/common.hpp"
#include "gneseek/estimator.hpp"
#include "gneseek/game.hpp"
#include "gneseek/graph.hpp"
#include "gneseek/rng.hpp"
#include "gneseek/schedules.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gneseek {

// Decentralized bandit primal-dual engine.
//
// Round protocol (delay-free): every player holds a base point z_{i,t} inside
// the eta_t-shrunk set, commits the perturbed play x_{i,t} = z_{i,t} +
// delta_t u_{i,t}, then observes single values f_{i,t}(x_t) and g_{i,t}(x_{i,t}),
// mixes multipliers with its neighbors, takes one mirror step against the
// one-point gradient estimates, averages the result into z, and runs a damped
// projected dual ascent.  The delayed variant consumes round t - tau
// observations at round t and anchors the mirror step at z_{i,t-tau}.
//
// All per-round randomness is drawn from substreams keyed by (seed, run,
// round, player), so iterates are bitwise independent of the order in which
// players are updated within a round.

// Values-only access to the game.  The learner receives this facade instead
// of the GameSpec evaluators; every call is recorded so tests can assert that
// only committed plays are ever queried (and with which lag).
class BanditFeed {
 public:
  struct Call {
    int player;
    double eval_t;      // round whose functions were evaluated
    long engine_round;  // round during which the call happened
    bool is_cost;
    Vec point;          // full profile for costs, own block for constraints
  };

  explicit BanditFeed(const GameSpec& game, bool log_calls = false)
      : game_(&game), log_calls_(log_calls) {}

  void begin_round(long t) { engine_round_ = t; }

  double cost_value(int i, double t, const Vec& x_full) const {
    if (log_calls_) log_.push_back({i, t, engine_round_, true, x_full});
    return game_->cost(i, t, x_full);
  }

  Vec constraint_value(int i, double t, const Vec& x_i) const {
    if (log_calls_) log_.push_back({i, t, engine_round_, false, x_i});
    return game_->constraint(i, t, x_i);
  }

  const std::vector<Call>& log() const { return log_; }
  void clear_log() { log_.clear(); }

 private:
  const GameSpec* game_;
  bool log_calls_;
  long engine_round_ = 0;
  mutable std::vector<Call> log_;
};

struct PlayerSnapshot {
  long round = 0;
  Vec z;        // base point of the round
  Vec x;        // committed play of the round
  Vec u;        // unit perturbation direction
  double delta = 0.0;
};

struct PlayerState {
  Vec z;        // current base point
  Vec z_tilde;  // latest mirror-step target
  Vec x;        // current committed play
  Vec u;
  Vec lambda;   // local multiplier
  std::deque<PlayerSnapshot> history;  // rounds t-tau .. t (capacity tau+1)
};

struct RoundTrace {
  long t = 0;
  std::vector<Vec> x, z, lambda, lambda_tilde;
  std::vector<double> cost_value;  // value revealed this round (NaN during warm-up)
  std::vector<Vec> constraint_value;
  std::vector<double> consensus_err;  // ||lambda_tilde_i - mean_j lambda_j||
};


enum class AssertionMode { Abort, Record };

struct AssertionLog {
  long checked = 0;
  long violations = 0;
  std::vector<std::string> notes;  // first few violation messages

  void report(bool ok, AssertionMode mode, const std::string& msg) {
    ++checked;
    if (ok) return;
    ++violations;
    if (notes.size() < 32) notes.push_back(msg);
    if (mode == AssertionMode::Abort) throw InvariantViolation(msg);
  }
};

struct LearnerEnv {
  const GameSpec* game = nullptr;
  const WeightMatrix* graph = nullptr;
  const Schedule* sched = nullptr;
  const Mirror* mirror = nullptr;
  BanditFeed* feed = nullptr;
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  AssertionMode assertion_mode = AssertionMode::Abort;
  AssertionLog* assertions = nullptr;  // optional
  // Test hooks.  perturbation_override replaces the sphere draw; update_order
  // permutes the within-round player loop (results must not depend on it).
  std::function<Vec(int player, long round, int dim)> perturbation_override;
  std::vector<int> update_order;

  Vec draw_direction(int player, long round, int dim) const {
    if (perturbation_override) return perturbation_override(player, round, dim);
    RngStream rng = substream(seed, run_index, static_cast<std::uint64_t>(round),
                              static_cast<std::uint64_t>(player), StreamTag::Sphere);
    return sample_sphere(dim, rng);
  }

  const std::vector<int>& order(std::vector<int>& scratch) const {
    if (!update_order.empty()) return update_order;
    scratch.resize(game->n_players);
    std::iota(scratch.begin(), scratch.end(), 0);
    return scratch;
  }

  void check(bool ok, const std::string& msg) const {
    static AssertionLog fallback;
    (assertions ? *assertions : fallback).report(ok, assertion_mode, msg);
  }
};

namespace detail {

inline Vec stack_plays(const GameSpec& g, const std::vector<PlayerState>& st) {
  Vec x(g.total_dim());
  for (int i = 0; i < g.n_players; ++i) g.set_block(x, i, st[i].x);
  return x;
}

inline Vec stack_history_plays(const GameSpec& g, const std::vector<PlayerState>& st, long round) {
  Vec x(g.total_dim());
  for (int i = 0; i < g.n_players; ++i) {
    const auto& h = st[i].history;
    const PlayerSnapshot* snap = nullptr;
    for (const auto& s : h)
      if (s.round == round) snap = &s;
    if (!snap) throw BufferUnderflow("history buffer does not contain the requested round");
    g.set_block(x, i, snap->x);
  }
  return x;
}

inline const PlayerSnapshot& history_at(const PlayerState& st, long round) {
  for (const auto& s : st.history)
    if (s.round == round) return s;
  throw BufferUnderflow("history buffer does not contain the requested round");
}

inline void push_snapshot(PlayerState& st, PlayerSnapshot snap, long capacity) {
  st.history.push_back(std::move(snap));
  while (static_cast<long>(st.history.size()) > capacity) st.history.pop_front();
}

// Shared invariants checked at the end of every committed round.
inline void check_round_invariants(const LearnerEnv& env, const std::vector<PlayerState>& st,
                                   long next_round) {
  const GameSpec& g = *env.game;
  auto next = env.sched->at(next_round);
  double beta_bound = g.bound_g / next.beta;
  for (int i = 0; i < g.n_players; ++i) {
    env.check(st[i].lambda.norm() <= beta_bound + 1e-9,
              "dual norm exceeded bound_g / beta at round " + std::to_string(next_round));
    env.check(g.sets[i].contains(st[i].x, 1e-9),
              "committed play left the feasible set at round " + std::to_string(next_round));
    env.check(g.sets[i].shrink(next.eta).contains(st[i].z, 1e-9),
              "base point left the shrunk set at round " + std::to_string(next_round));
  }
}

}  // namespace detail

// Fresh states for round 1 (delay-free) or rounds 1..tau+1 (delayed): the
// round-1 base point is sampled uniformly in the eta_1-shrunk set (a single
// point, its center, since eta_1 = 1), multipliers start at zero, and each
// pre-filled round commits its own perturbed play.
inline std::vector<PlayerState> init_run(const LearnerEnv& env, Variant variant = Variant::DelayFree) {
  const GameSpec& g = *env.game;
  if (g.n_players <= 0 || static_cast<int>(g.sets.size()) != g.n_players)
    throw DimensionMismatch("init_run: game must carry one strategy set per player");
  if (env.graph->n_players != g.n_players)
    throw DimensionMismatch("init_run: graph size must match the player count");

  const long tau = variant == Variant::Delayed ? env.sched->tau() : 0;
  std::vector<PlayerState> st(g.n_players);
  for (int i = 0; i < g.n_players; ++i) {
    auto v1 = env.sched->at(1);
    RngStream init_rng = substream(env.seed, env.run_index, 0, static_cast<std::uint64_t>(i),
                                   StreamTag::Init);
    Vec z1 = g.sets[i].shrink(v1.eta).sample_uniform(init_rng);
    st[i].z = z1;
    st[i].z_tilde = z1;
    st[i].lambda = Vec::Zero(g.m);
    for (long r = 1; r <= tau + 1; ++r) {
      auto vr = env.sched->at(r);
      Vec u = env.draw_direction(i, r, g.dims[i]);
      Vec x = z1 + vr.delta * u;
      if (r == tau + 1) {
        st[i].u = u;
        st[i].x = x;
      }
      detail::push_snapshot(st[i], {r, z1, x, u, vr.delta}, tau + 1);
    }
  }
  return st;
}

namespace detail {

// One primal-dual update.  data_round is the round whose observations feed the
// estimates (t for the delay-free algorithm, t - tau for the delayed one);
// anchor_round is where the mirror step and the z-averaging are anchored.
inline RoundTrace step_impl(std::vector<PlayerState>& st, const LearnerEnv& env, long t,
                            long data_round, long anchor_round) {
  const GameSpec& g = *env.game;
  const Schedule& sched = *env.sched;
  auto now = sched.at(t);
  auto next = sched.at(t + 1);

  env.feed->begin_round(t);

  // Snapshot: all reads below use pre-step state, so the per-player loop
  // order cannot influence the result.
  Vec data_profile = stack_history_plays(g, st, data_round);
  std::vector<Vec> lambda_snapshot(g.n_players);
  for (int i = 0; i < g.n_players; ++i) lambda_snapshot[i] = st[i].lambda;
  std::vector<Vec> mixed = mix_duals(*env.graph, lambda_snapshot);

  Vec lambda_mean = Vec::Zero(g.m);
  for (const Vec& l : lambda_snapshot) lambda_mean += l;
  lambda_mean /= static_cast<double>(g.n_players);

  RoundTrace trace;
  trace.t = t;
  trace.x.resize(g.n_players);
  trace.z.resize(g.n_players);
  trace.lambda = lambda_snapshot;
  trace.lambda_tilde = mixed;
  trace.cost_value.assign(g.n_players, 0.0);
  trace.constraint_value.resize(g.n_players);
  trace.consensus_err.resize(g.n_players);
  for (int i = 0; i < g.n_players; ++i) {
    trace.x[i] = history_at(st[i], t).x;
    trace.z[i] = history_at(st[i], t).z;
    trace.consensus_err[i] = (mixed[i] - lambda_mean).norm();
  }

  std::vector<int> scratch;
  const std::vector<int>& order = env.order(scratch);
  std::vector<PlayerState> updated = st;
  for (int idx : order) {
    const int i = idx;
    const PlayerSnapshot& snap = history_at(st[i], data_round);

    // Single-value revelation for the data round.
    double fval = env.feed->cost_value(i, static_cast<double>(data_round), data_profile);
    Vec gval = env.feed->constraint_value(i, static_cast<double>(data_round), snap.x);
    env.check(std::abs(fval) <= g.bound_f + 1e-9, "observed cost exceeded bound_f");
    env.check(gval.norm() <= g.bound_g + 1e-9, "observed constraint exceeded bound_g");
    trace.cost_value[i] = fval;
    trace.constraint_value[i] = gval;

    // One-point estimates at the data round's base point.
    Vec grad_f = estimate_cost_gradient(fval, g.dims[i], snap.delta, snap.u);
    Mat jac_g = estimate_constraint_jacobian(gval, g.dims[i], snap.delta, snap.u);
    Vec grad = grad_f + jac_g.transpose() * mixed[i];

    // Mirror step inside the current shrunk set, anchored at the data round's
    // base point; then average the anchor toward the target.
    const Vec& anchor = history_at(st[i], anchor_round).z;
    StrategySet shrunk = g.sets[i].shrink(now.eta);
    Vec z_tilde = env.mirror->mirror_step(shrunk, anchor, grad, now.alpha);
    Vec z_next = (1.0 - now.alpha) * anchor + now.alpha * z_tilde;

    // Commit the next perturbed play.
    Vec u_next = env.draw_direction(i, t + 1, g.dims[i]);
    Vec x_next = z_next + next.delta * u_next;

    // Damped projected dual ascent from the mixed multiplier.
    Vec lambda_next =
        clip_nonnegative(mixed[i] + now.gamma * (gval - now.beta * mixed[i]));

    PlayerState& out = updated[i];
    out.z = z_next;
    out.z_tilde = z_tilde;
    out.u = u_next;
    out.x = x_next;
    out.lambda = lambda_next;
    push_snapshot(out, {t + 1, z_next, x_next, u_next, next.delta},
                  (env.sched->tau() > 0 ? env.sched->tau() : 0) + 1);
  }
  st = std::move(updated);
  check_round_invariants(env, st, t + 1);
  return trace;
}

}  // namespace detail

// Delay-free update at round t: consumes round-t observations, produces the
// round t+1 state.
inline RoundTrace step_algorithm1(std::vector<PlayerState>& st, const LearnerEnv& env, long t) {
  if (t < 1) throw BufferUnderflow("step_algorithm1: rounds start at t = 1");
  return detail::step_impl(st, env, t, t, t);
}

// Delayed update at round t > tau: consumes round (t - tau) observations and
// anchors at z_{t - tau}.
inline RoundTrace step_algorithm2(std::vector<PlayerState>& st, const LearnerEnv& env, long t) {
  const long tau = env.sched->tau();
  if (t <= tau) throw BufferUnderflow("step_algorithm2: defined for rounds t > tau");
  return detail::step_impl(st, env, t, t - tau, t - tau);
}

// Run a full horizon.  For the delayed variant the first tau rounds only
// commit the pre-filled perturbed plays (no update is defined yet); their
// trace rows carry zero multipliers and no revealed values.
inline std::vector<RoundTrace> run(const LearnerEnv& env, long horizon, Variant variant) {
  std::vector<PlayerState> st = init_run(env, variant);
  const GameSpec& g = *env.game;
  const long tau = variant == Variant::Delayed ? env.sched->tau() : 0;

  // Recursive consensus envelope E_t = sigma E_{t-1} + gamma_{t-1}:
  // ||mixed_i - mean|| must stay below 2 sqrt(N) bound_g E_t.
  double envelope = 1.0;  // E_1 with the gamma_0 := 1 convention
  const double env_scale = 2.0 * std::sqrt(static_cast<double>(g.n_players)) * g.bound_g;

  std::vector<RoundTrace> traces;
  traces.reserve(horizon);
  for (long t = 1; t <= horizon; ++t) {
    if (t <= tau) {
      RoundTrace warm;
      warm.t = t;
      warm.x.resize(g.n_players);
      warm.z.resize(g.n_players);
      warm.lambda.assign(g.n_players, Vec::Zero(g.m));
      warm.lambda_tilde.assign(g.n_players, Vec::Zero(g.m));
      warm.cost_value.assign(g.n_players, std::nan(""));
      warm.constraint_value.assign(g.n_players, Vec::Constant(g.m, std::nan("")));
      warm.consensus_err.assign(g.n_players, 0.0);
      for (int i = 0; i < g.n_players; ++i) {
        const auto& snap = detail::history_at(st[i], t);
        warm.x[i] = snap.x;
        warm.z[i] = snap.z;
      }
      traces.push_back(std::move(warm));
    } else {
      RoundTrace tr = variant == Variant::Delayed ? step_algorithm2(st, env, t)
                                                  : step_algorithm1(st, env, t);
      for (int i = 0; i < g.n_players; ++i)
        env.check(tr.consensus_err[i] <= env_scale * envelope + 1e-9,
                  "consensus error exceeded its envelope at round " + std::to_string(t));
      traces.push_back(std::move(tr));
    }
    envelope = env.graph->sigma_m * envelope + env.sched->gamma_at(t);
  }
  return traces;
}

}  // namespace gneseek
