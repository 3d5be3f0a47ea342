#pragma once

#include "gneseek/common.hpp"
#include "gneseek/game.hpp"
#include "gneseek/learner.hpp"
#include "gneseek/schedules.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace gneseek {

// Post-hoc performance measures computed from recorded round traces and a
// comparator trajectory (normally the centralized solver's per-round
// equilibria).  Everything here re-evaluates the game's true cost and
// constraint functions; nothing feeds back into the learner.

// Cumulative dynamic regret of one player against a moving comparator:
//   Reg_i(t) = sum_{s<=t} [ f_{i,s}(x_{i,s}, x*_{-i,s}) - f_{i,s}(x*_s) ].
// The first term mixes the player's actual play into the comparator profile,
// so only player i deviates from the benchmark.  `comparator[s]` is the
// stacked benchmark profile for trace s and must cover every trace.
inline std::vector<double> dynamic_regret(const GameSpec& g,
                                          const std::vector<RoundTrace>& traces,
                                          const std::vector<Vec>& comparator, int player) {
  if (player < 0 || player >= g.n_players) throw DimensionMismatch("player index out of range");
  if (comparator.size() < traces.size())
    throw LengthMismatch("comparator trajectory shorter than the trace");
  std::vector<double> cum;
  cum.reserve(traces.size());
  double acc = 0.0;
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const RoundTrace& tr = traces[s];
    const Vec& star = comparator[s];
    if (star.size() != g.total_dim())
      throw DimensionMismatch("comparator profile has the wrong stacked dimension");
    Vec mixed = star;
    g.set_block(mixed, player, tr.x[static_cast<std::size_t>(player)]);
    acc += g.cost(player, tr.t, mixed) - g.cost(player, tr.t, star);
    cum.push_back(acc);
  }
  return cum;
}

// Stack one trace's per-player plays into a single joint profile.
inline Vec stacked_play(const GameSpec& g, const RoundTrace& tr) {
  Vec full(g.total_dim());
  for (int i = 0; i < g.n_players; ++i) g.set_block(full, i, tr.x[static_cast<std::size_t>(i)]);
  return full;
}

// Cumulative constraint violation:
//   R_g(t) = || [ sum_{s<=t} g_s(x_s) ]_+ ||
// where g_s(x) stacks the aggregated shared constraint of round s.  The
// positive part is taken on the *running sum*, so early over-consumption can
// be cancelled by later slack — matching how the shared budget is accounted.
inline std::vector<double> violation_series(const GameSpec& g,
                                            const std::vector<RoundTrace>& traces) {
  std::vector<double> out;
  out.reserve(traces.size());
  Vec running = Vec::Zero(g.m);
  for (const RoundTrace& tr : traces) {
    running += g.stack_sum_constraint(tr.t, stacked_play(g, tr));
    out.push_back(clip_nonnegative(running).norm());
  }
  return out;
}

// Violation accumulated over the first `horizon` rounds of a trace.
inline double constraint_violation(const GameSpec& g, const std::vector<RoundTrace>& traces,
                                   long horizon) {
  if (horizon < 1 || static_cast<long>(traces.size()) < horizon)
    throw LengthMismatch("trace shorter than the requested horizon");
  Vec running = Vec::Zero(g.m);
  for (long s = 0; s < horizon; ++s)
    running += g.stack_sum_constraint(traces[static_cast<std::size_t>(s)].t,
                                      stacked_play(g, traces[static_cast<std::size_t>(s)]));
  return clip_nonnegative(running).norm();
}

// Partial sums of the comparator's path length:
//   Theta(t) = sum_{s=1}^{t} || x*_{s+1} - x*_s ||.
// Needs one profile beyond the horizon, so `comparator.size() >= horizon+1`.
inline std::vector<double> path_variation(const std::vector<Vec>& comparator, long horizon) {
  if (horizon < 1) throw LengthMismatch("path variation needs a positive horizon");
  if (static_cast<long>(comparator.size()) < horizon + 1)
    throw LengthMismatch("path variation needs one comparator profile beyond the horizon");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  double acc = 0.0;
  for (long s = 0; s < horizon; ++s) {
    acc += (comparator[static_cast<std::size_t>(s) + 1] -
            comparator[static_cast<std::size_t>(s)])
               .norm();
    out.push_back(acc);
  }
  return out;
}

// Divide a cumulative series by the 1-based round index, giving the
// time-averaged curve that the convergence statements are about.
inline std::vector<double> time_averaged(const std::vector<double>& cumulative) {
  std::vector<double> out(cumulative.size());
  for (std::size_t s = 0; s < cumulative.size(); ++s)
    out[s] = cumulative[s] / static_cast<double>(s + 1);
  return out;
}

// Pointwise mean and standard error across repeated runs of equal length.
// The standard error uses the sample standard deviation (n-1 in the
// denominator) over sqrt(R); with a single run it is NaN, not zero.
struct MeanSeries {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

inline MeanSeries monte_carlo_mean(const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw LengthMismatch("no runs to average");
  const std::size_t len = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != len) throw LengthMismatch("runs have different lengths");
  const double count = static_cast<double>(runs.size());
  MeanSeries out;
  out.mean.assign(len, 0.0);
  out.stderr_.assign(len, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < len; ++s) {
    double m = 0.0;
    for (const auto& r : runs) m += r[s];
    m /= count;
    out.mean[s] = m;
    if (runs.size() > 1) {
      double ss = 0.0;
      for (const auto& r : runs) ss += (r[s] - m) * (r[s] - m);
      out.stderr_[s] = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
    }
  }
  return out;
}

// Offline re-check of the dual consensus envelope over a recorded run:
//   max_i || mixed_dual_i(t) - mean_dual(t) || <= 2 sqrt(N) B_g E_t,
// with E_1 = 1 and E_{t+1} = sigma E_t + gamma_t.  The learner enforces this
// online; this recomputes it from the trace so a saved run can be audited.
struct EnvelopeReport {
  bool ok = true;
  long first_violation = 0;   // round of the first breach, 0 when none
  double worst_margin = 0.0;  // max over rounds of (observed - bound)
};

inline EnvelopeReport consensus_envelope_ok(const std::vector<RoundTrace>& traces,
                                            const Schedule& sched, double sigma_m,
                                            double bound_g, int n_players, double tol = 1e-9) {
  EnvelopeReport rep;
  double envelope = 1.0;
  const double scale = 2.0 * std::sqrt(static_cast<double>(n_players)) * bound_g;
  long round = 0;
  for (const RoundTrace& tr : traces) {
    ++round;
    const double bound = scale * envelope;
    double observed = 0.0;
    for (double e : tr.consensus_err) observed = std::max(observed, e);
    const double margin = observed - bound;
    rep.worst_margin = std::max(rep.worst_margin, margin);
    if (margin > tol && rep.first_violation == 0) {
      rep.ok = false;
      rep.first_violation = round;
    }
    envelope = sigma_m * envelope + sched.gamma_at(round);
  }
  return rep;
}

}  // namespace gneseek
