#pragma once

#include "gneseek/common.hpp"
#include "gneseek/config.hpp"
#include "gneseek/cournot.hpp"
#include "gneseek/equilibrium.hpp"
#include "gneseek/learner.hpp"
#include "gneseek/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gneseek {

// Experiment driver: computes (or reloads) the centralized benchmark
// trajectory, executes the configured number of learner runs, and writes
// every result as CSV plus a plain-text summary.  All numeric output goes
// through shortest-round-trip formatting, so files are byte-identical across
// reruns and reloading the trajectory cache reproduces the exact doubles.

// --------------------------------------------------------------------------
// Locale-independent numeric formatting and parsing.

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("malformed number '" + std::string(s) + "' in a data file");
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Multi-component cells (a player's block, a multiplier) are ';'-joined so a
// row stays one CSV record regardless of dimensions.
inline std::string join_components(const Vec& v) {
  std::string out;
  for (long k = 0; k < v.size(); ++k) {
    if (k) out += ';';
    out += format_double(v[k]);
  }
  return out;
}

// --------------------------------------------------------------------------
// Benchmark trajectory cache.
//
// trajectory.csv starts with a fingerprint comment; a cache whose fingerprint
// or length does not match the request is recomputed and overwritten.

inline std::string trajectory_fingerprint(const GameSpec& g, const SolverOptions& opt) {
  std::string s = "# trajectory game=" + g.name;
  s += " players=" + std::to_string(g.n_players);
  s += " total_dim=" + std::to_string(g.total_dim());
  s += " m=" + std::to_string(g.m);
  s += " tol=" + format_double(opt.tol);
  s += " max_iter=" + std::to_string(opt.max_iter);
  s += " probes=" + std::to_string(opt.probe_count);
  s += " probe_seed=" + std::to_string(opt.probe_seed);
  return s;
}

inline void write_trajectory_csv(const std::string& path, const GameSpec& g,
                                 const SolverOptions& opt,
                                 const std::vector<GneSolution>& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory cache '" + path + "'");
  out << trajectory_fingerprint(g, opt) << '\n';
  out << "t";
  for (int k = 0; k < g.total_dim(); ++k) out << ",x_" << k;
  for (int k = 0; k < g.m; ++k) out << ",lambda_" << k;
  out << ",residual,iterations\n";
  for (const GneSolution& sol : traj) {
    out << format_double(sol.t);
    for (long k = 0; k < sol.x_star.size(); ++k) out << ',' << format_double(sol.x_star[k]);
    for (long k = 0; k < sol.lambda_star.size(); ++k)
      out << ',' << format_double(sol.lambda_star[k]);
    out << ',' << format_double(sol.residual) << ',' << sol.iterations << '\n';
  }
}

// Returns an empty vector when the cache is absent, malformed, or was written
// for a different game / solver setup.
inline std::vector<GneSolution> load_trajectory_csv(const std::string& path, const GameSpec& g,
                                                    const SolverOptions& opt) {
  std::ifstream in(path);
  if (!in) return {};
  std::string line;
  if (!std::getline(in, line) || line != trajectory_fingerprint(g, opt)) return {};
  if (!std::getline(in, line)) return {};  // header
  const int want = 1 + g.total_dim() + g.m + 2;
  std::vector<GneSolution> traj;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_fields(line);
      if (static_cast<int>(f.size()) != want) return {};
      GneSolution sol;
      sol.t = parse_double(f[0]);
      sol.x_star = Vec(g.total_dim());
      for (int k = 0; k < g.total_dim(); ++k) sol.x_star[k] = parse_double(f[1 + k]);
      sol.lambda_star = Vec(g.m);
      for (int k = 0; k < g.m; ++k) sol.lambda_star[k] = parse_double(f[1 + g.total_dim() + k]);
      sol.residual = parse_double(f[static_cast<std::size_t>(want) - 2]);
      sol.iterations = static_cast<long>(parse_double(f[static_cast<std::size_t>(want) - 1]));
      traj.push_back(std::move(sol));
    }
  } catch (const Error&) {
    return {};
  }
  return traj;
}

inline std::vector<GneSolution> ensure_trajectory(const GameSpec& g, const SolverOptions& opt,
                                                  long count, const std::string& path,
                                                  std::ostream* log = nullptr) {
  std::vector<GneSolution> traj = load_trajectory_csv(path, g, opt);
  if (static_cast<long>(traj.size()) >= count) {
    if (log) (*log) << "benchmark trajectory: reusing cache (" << traj.size() << " rounds)\n";
    return traj;
  }
  if (log) (*log) << "benchmark trajectory: solving " << count << " rounds\n";
  traj = gne_trajectory(g, count, opt);
  write_trajectory_csv(path, g, opt, traj);
  return traj;
}

// --------------------------------------------------------------------------
// Experiment results kept in memory (per-run CSVs carry the full detail).

struct ExperimentSummary {
  double sigma_m = 0.0;
  double theta_path = 0.0;        // benchmark path length over the horizon
  double lambda_star_max = 0.0;   // max_t ||lambda*_t|| along the benchmark
  double worst_residual = 0.0;    // min_t residual certificate
  long assertions_checked = 0;
  long assertion_violations = 0;
  std::vector<std::string> assertion_notes;
  double closed_form_max_gap = std::numeric_limits<double>::quiet_NaN();
  MeanSeries violation_rate;             // time-averaged violation, mean over runs
  std::vector<MeanSeries> regret_rate;   // per player, time-averaged, mean over runs
};

namespace detail {

// One row per (round, player).  Players with fewer coordinates than the
// widest one leave the trailing cells empty, keeping the header stable.
inline void write_trace_csv(const std::string& path, const GameSpec& g,
                            const std::vector<RoundTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace file '" + path + "'");
  int dmax = 0;
  for (int d : g.dims) dmax = std::max(dmax, d);
  out << "t,player";
  for (int k = 0; k < dmax; ++k) out << ",x_" << k;
  for (int k = 0; k < dmax; ++k) out << ",z_" << k;
  for (int k = 0; k < g.m; ++k) out << ",lambda_" << k;
  out << ",f_value";
  for (int k = 0; k < g.m; ++k) out << ",g_" << k;
  out << ",consensus_err\n";
  auto padded = [&out, dmax](const Vec& v) {
    for (int k = 0; k < dmax; ++k) {
      out << ',';
      if (k < v.size()) out << format_double(v[k]);
    }
  };
  for (const RoundTrace& tr : traces) {
    for (int i = 0; i < g.n_players; ++i) {
      out << tr.t << ',' << i;
      padded(tr.x[i]);
      padded(tr.z[i]);
      for (int k = 0; k < g.m; ++k) out << ',' << format_double(tr.lambda[i][k]);
      out << ',' << format_double(tr.cost_value[i]);
      for (int k = 0; k < g.m; ++k) out << ',' << format_double(tr.constraint_value[i][k]);
      out << ',' << format_double(tr.consensus_err[i]) << '\n';
    }
  }
}

}  // namespace detail

// Run the configured experiment end to end, writing into cfg.out_dir:
//   trajectory.csv            benchmark equilibria (cached across invocations)
//   closed_form_compare.csv   production game only: solver vs closed-form gap
//   trace_run{r}.csv          full per-round, per-player state of run r
//   regret_run{r}.csv         cumulative and time-averaged regret of run r
//   violation_run{r}.csv      cumulative and time-averaged violation of run r
//   aggregate.csv             per-player regret and run-wide violation means
//                             with standard errors across runs
//   summary.txt               final numbers in plain text
inline ExperimentSummary run_experiment(const RunConfig& cfg, std::ostream* log = nullptr) {
  ValidationReport rep = validate_config(cfg);
  if (!rep.ok) {
    std::string msg = "invalid config:";
    for (const auto& e : rep.errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }

  GameSpec game = build_game(cfg);
  WeightMatrix graph = build_graph(cfg, game.n_players);
  Schedule sched = build_schedule(cfg, game);
  SolverOptions sopt = build_solver_options(cfg);
  Mirror mirror = Mirror::euclidean();
  const Variant variant =
      cfg.algorithm == "algorithm2" ? Variant::Delayed : Variant::DelayFree;

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto at = [&cfg](const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
  };

  // Benchmark trajectory: one profile per round plus the overhang needed for
  // the path-length partial sums.
  const long overhang = std::max(cfg.delay, 1L);
  const long traj_count = cfg.horizon + overhang;
  std::vector<GneSolution> trajectory =
      ensure_trajectory(game, sopt, traj_count, at("trajectory.csv"), log);

  // Comparator profiles for the regret metric (one beyond the horizon for the
  // path-length series).
  std::vector<Vec> comparator;
  comparator.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
  for (long s = 0; s <= cfg.horizon; ++s) {
    if (cfg.comparator == "closed_form")
      comparator.push_back(cournot_closed_form_gne(static_cast<double>(s + 1), cfg.cournot));
    else
      comparator.push_back(trajectory[static_cast<std::size_t>(s)].x_star);
  }

  ExperimentSummary sum;
  sum.sigma_m = graph.sigma_m;
  sum.theta_path = path_variation(comparator, cfg.horizon).back();
  sum.worst_residual = std::numeric_limits<double>::infinity();
  for (long s = 0; s < cfg.horizon; ++s) {
    const GneSolution& sol = trajectory[static_cast<std::size_t>(s)];
    sum.lambda_star_max = std::max(sum.lambda_star_max, sol.lambda_star.norm());
    sum.worst_residual = std::min(sum.worst_residual, sol.residual);
  }

  // Production game: report the closed-form candidate next to the solver's
  // equilibrium.  It is a side-by-side diagnostic, never the benchmark,
  // unless the comparator was explicitly configured to use it.
  if (cfg.game_kind == "cournot") {
    std::ofstream out(at("closed_form_compare.csv"));
    if (!out) throw ConfigError("cannot write closed_form_compare.csv");
    out << "t,gap_l2,gap_linf\n";
    sum.closed_form_max_gap = 0.0;
    for (long s = 0; s < cfg.horizon; ++s) {
      const GneSolution& sol = trajectory[static_cast<std::size_t>(s)];
      Vec cf = cournot_closed_form_gne(sol.t, cfg.cournot);
      Vec gap = sol.x_star - cf;
      sum.closed_form_max_gap = std::max(sum.closed_form_max_gap, gap.norm());
      out << format_double(sol.t) << ',' << format_double(gap.norm()) << ','
          << format_double(gap.cwiseAbs().maxCoeff()) << '\n';
    }
  }

  // Learner runs: sequential, each keyed only by (seed, run index), so the
  // execution order can never leak into the results.
  std::vector<std::vector<std::vector<double>>> regret_rate_runs(
      static_cast<std::size_t>(game.n_players));
  std::vector<std::vector<double>> violation_rate_runs;
  for (int r = 0; r < cfg.runs; ++r) {
    if (log) (*log) << "run " << r << ": simulating " << cfg.horizon << " rounds\n";
    BanditFeed feed(game);
    AssertionLog alog;
    LearnerEnv env;
    env.game = &game;
    env.graph = &graph;
    env.sched = &sched;
    env.mirror = &mirror;
    env.feed = &feed;
    env.seed = cfg.seed;
    env.run_index = static_cast<std::uint64_t>(r);
    env.assertion_mode = parse_assertion_mode(cfg.assertion_mode);
    env.assertions = &alog;

    std::vector<RoundTrace> traces = run(env, cfg.horizon, variant);
    detail::write_trace_csv(at("trace_run" + std::to_string(r) + ".csv"), game, traces);

    std::vector<double> viol = violation_series(game, traces);
    std::vector<double> viol_rate = time_averaged(viol);
    {
      std::ofstream out(at("violation_run" + std::to_string(r) + ".csv"));
      if (!out) throw ConfigError("cannot write violation csv");
      out << "t,violation_norm,violation_over_t\n";
      for (std::size_t s = 0; s < viol.size(); ++s)
        out << (s + 1) << ',' << format_double(viol[s]) << ',' << format_double(viol_rate[s])
            << '\n';
    }
    violation_rate_runs.push_back(std::move(viol_rate));

    std::vector<std::vector<double>> cum_all, rate_all;
    for (int p = 0; p < game.n_players; ++p) {
      cum_all.push_back(dynamic_regret(game, traces, comparator, p));
      rate_all.push_back(time_averaged(cum_all.back()));
    }
    {
      std::ofstream rout(at("regret_run" + std::to_string(r) + ".csv"));
      if (!rout) throw ConfigError("cannot write regret csv");
      rout << "t,player,cum_regret,regret_over_t\n";
      for (long s = 0; s < cfg.horizon; ++s)
        for (int p = 0; p < game.n_players; ++p)
          rout << (s + 1) << ',' << p << ','
               << format_double(cum_all[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)])
               << ','
               << format_double(rate_all[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)])
               << '\n';
    }
    for (int p = 0; p < game.n_players; ++p)
      regret_rate_runs[static_cast<std::size_t>(p)].push_back(
          std::move(rate_all[static_cast<std::size_t>(p)]));

    sum.assertions_checked += alog.checked;
    sum.assertion_violations += alog.violations;
    for (const auto& n : alog.notes)
      if (sum.assertion_notes.size() < 32) sum.assertion_notes.push_back(n);
  }

  // Aggregates across runs.
  sum.violation_rate = monte_carlo_mean(violation_rate_runs);
  for (int p = 0; p < game.n_players; ++p)
    sum.regret_rate.push_back(monte_carlo_mean(regret_rate_runs[static_cast<std::size_t>(p)]));

  {
    // One row per (round, player); the run-wide violation columns repeat on
    // every player's row of the same round.
    std::ofstream out(at("aggregate.csv"));
    if (!out) throw ConfigError("cannot write aggregate.csv");
    out << "t,player,mean_regret_over_t,stderr,mean_violation_over_t,stderr\n";
    for (long s = 0; s < cfg.horizon; ++s)
      for (int p = 0; p < game.n_players; ++p) {
        const MeanSeries& ms = sum.regret_rate[static_cast<std::size_t>(p)];
        out << (s + 1) << ',' << p << ',' << format_double(ms.mean[static_cast<std::size_t>(s)])
            << ',' << format_double(ms.stderr_[static_cast<std::size_t>(s)]) << ','
            << format_double(sum.violation_rate.mean[static_cast<std::size_t>(s)]) << ','
            << format_double(sum.violation_rate.stderr_[static_cast<std::size_t>(s)]) << '\n';
      }
  }

  {
    std::ofstream out(at("summary.txt"));
    if (!out) throw ConfigError("cannot write summary.txt");
    out << "experiment: " << cfg.name << '\n';
    out << "game: " << cfg.game_kind << "  players=" << game.n_players
        << "  total_dim=" << game.total_dim() << "  m=" << game.m << '\n';
    out << "graph: " << cfg.graph.kind << "  rule=" << cfg.graph.rule
        << "  sigma_m=" << format_double(sum.sigma_m) << '\n';
    out << "algorithm: " << cfg.algorithm << "  delay=" << cfg.delay << '\n';
    out << "exponents: a1=" << format_double(cfg.a1) << "  a2=" << format_double(cfg.a2)
        << "  a3=" << format_double(cfg.a3)
        << "  delta_scale=" << format_double(cfg.delta_scale) << '\n';
    out << "horizon: " << cfg.horizon << "  runs: " << cfg.runs << "  seed: " << cfg.seed
        << '\n';
    out << "comparator: " << cfg.comparator << '\n';
    out << "oracle: tol=" << format_double(cfg.oracle.tol)
        << "  max_iter=" << cfg.oracle.max_iter << "  probes=" << cfg.oracle.probes << '\n';
    out << "benchmark path length: " << format_double(sum.theta_path) << '\n';
    out << "benchmark max multiplier norm: " << format_double(sum.lambda_star_max) << '\n';
    out << "benchmark worst residual certificate: " << format_double(sum.worst_residual)
        << '\n';
    out << "assertions: checked=" << sum.assertions_checked
        << " violations=" << sum.assertion_violations << '\n';
    if (cfg.game_kind == "cournot")
      out << "closed-form gap (max L2 over rounds): "
          << format_double(sum.closed_form_max_gap) << '\n';
    out << "final time-averaged violation: mean="
        << format_double(sum.violation_rate.mean.back())
        << " stderr=" << format_double(sum.violation_rate.stderr_.back()) << '\n';
    out << "final time-averaged regret per player:\n";
    for (int p = 0; p < game.n_players; ++p)
      out << "  player " << p << ": mean="
          << format_double(sum.regret_rate[static_cast<std::size_t>(p)].mean.back())
          << " stderr="
          << format_double(sum.regret_rate[static_cast<std::size_t>(p)].stderr_.back())
          << '\n';
  }
  return sum;
}

}  // namespace gneseek
