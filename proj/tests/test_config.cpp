// Configuration layer (JSON parsing, presets, builders, validation) plus the
// end-to-end experiment driver (CSV outputs, caching, reproducibility).

#include <catch2/catch_amalgamated.hpp>

#include <gneseek/config.hpp>
#include <gneseek/experiment.hpp>
#include <gneseek/metrics.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace gneseek;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

long line_count(const std::string& text) {
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

bool has_error_containing(const ValidationReport& rep, const std::string& needle) {
  for (const auto& e : rep.errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// [config]
// ---------------------------------------------------------------------------

TEST_CASE("empty config yields the documented defaults", "[config]") {
  RunConfig c = parse_config("{}");
  REQUIRE(c.name == "custom");
  REQUIRE(c.game_kind == "cournot");
  REQUIRE(c.algorithm == "algorithm1");
  REQUIRE(c.delay == 0);
  REQUIRE(c.a1 == 0.45);
  REQUIRE(c.a2 == 0.10);
  REQUIRE(c.a3 == 0.11);
  REQUIRE(c.delta_scale == 1.0);
  REQUIRE(c.horizon == 5000);
  REQUIRE(c.runs == 10);
  REQUIRE(c.seed == 42);
  REQUIRE(c.assertion_mode == "abort");
  REQUIRE(c.mirror == "euclidean");
  REQUIRE(c.comparator == "vi");
  REQUIRE(c.graph.kind == "complete");
  REQUIRE(c.graph.rule == "metropolis");
  REQUIRE(validate_config(c).ok);
}

TEST_CASE("presets seed the config and explicit keys override them", "[config]") {
  RunConfig f1 = preset_config("figure1");
  REQUIRE(f1.algorithm == "algorithm1");
  REQUIRE(f1.delay == 0);
  REQUIRE(f1.horizon == 5000);
  REQUIRE(f1.runs == 10);

  // figure2 is the same experiment (the runner always writes both metrics).
  RunConfig f2 = preset_config("figure2");
  REQUIRE(f2.algorithm == f1.algorithm);
  REQUIRE(f2.horizon == f1.horizon);
  REQUIRE(f2.game_kind == f1.game_kind);

  RunConfig f3 = preset_config("figure3");
  REQUIRE(f3.algorithm == "algorithm2");
  REQUIRE(f3.delay == 1);

  RunConfig c2 = preset_config("corollary2");
  REQUIRE(c2.a1 == 3.0 / 7.0);
  REQUIRE(c2.a2 == 0.0);
  REQUIRE(c2.a3 == 1.0 / 7.0);
  REQUIRE(validate_config(c2).ok);

  RunConfig mixed = parse_config(R"({"preset": "figure3", "horizon": 123, "seed": 7})");
  REQUIRE(mixed.algorithm == "algorithm2");
  REQUIRE(mixed.delay == 1);
  REQUIRE(mixed.horizon == 123);
  REQUIRE(mixed.seed == 7);

  REQUIRE_THROWS_WITH(preset_config("figure9"), ContainsSubstring("unknown preset"));
  REQUIRE_THROWS_AS(preset_config("figure9"), ConfigError);
}

TEST_CASE("unknown keys are rejected by name", "[config]") {
  REQUIRE_THROWS_WITH(parse_config(R"({"horizn": 5})"), ContainsSubstring("horizn"));
  REQUIRE_THROWS_WITH(parse_config(R"({"game": {"kind": "cournot", "players": 3}})"),
                      ContainsSubstring("players"));
  REQUIRE_THROWS_WITH(parse_config(R"({"exponents": {"a1": 0.4, "a9": 0.1}})"),
                      ContainsSubstring("a9"));
  REQUIRE_THROWS_WITH(parse_config(R"({"graph": {"kind": "ring", "degree": 2}})"),
                      ContainsSubstring("degree"));
  REQUIRE_THROWS_WITH(parse_config(R"({"oracle": {"tol": 1e-9, "iters": 10}})"),
                      ContainsSubstring("iters"));
}

TEST_CASE("type mismatches are rejected with the offending key", "[config]") {
  REQUIRE_THROWS_WITH(parse_config(R"({"horizon": "long"})"),
                      ContainsSubstring("must be an integer"));
  REQUIRE_THROWS_WITH(parse_config(R"({"delta_scale": "big"})"),
                      ContainsSubstring("must be a number"));
  REQUIRE_THROWS_WITH(parse_config(R"({"name": 3})"), ContainsSubstring("must be a string"));
  REQUIRE_THROWS_WITH(parse_config(R"({"seed": "abc"})"), ContainsSubstring("seed"));
  REQUIRE_THROWS_WITH(parse_config(R"({"exponents": [0.4, 0.1, 0.11]})"),
                      ContainsSubstring("exponents"));
  REQUIRE_THROWS_WITH(parse_config(R"({"game": 5})"), ContainsSubstring("game"));
  REQUIRE_THROWS_WITH(parse_config(R"({"game": {"n_players": 4}})"),
                      ContainsSubstring("kind"));
  REQUIRE_THROWS_WITH(parse_config(R"({"game": {"kind": "chess"}})"),
                      ContainsSubstring("game.kind"));
}

TEST_CASE("parse errors carry file and line context", "[config]") {
  const std::string broken = "{\n\"horizon\": 5,\nq\n}";
  REQUIRE_THROWS_WITH(parse_config(broken, "test.json"), ContainsSubstring("test.json:3"));
  REQUIRE_THROWS_AS(parse_config(broken, "test.json"), ConfigError);
  REQUIRE_THROWS_WITH(parse_config("[1, 2]"), ContainsSubstring("top level"));
  REQUIRE_THROWS_WITH(load_config_file("/nonexistent/nope.json"),
                      ContainsSubstring("cannot open"));
}

TEST_CASE("validation cites the violated schedule condition", "[config]") {
  RunConfig bad_order = parse_config(R"({"exponents": {"a1": 0.45, "a2": 0.2, "a3": 0.1}})");
  ValidationReport rep = validate_config(bad_order);
  REQUIRE_FALSE(rep.ok);
  REQUIRE(has_error_containing(rep, "a2 < a3"));

  RunConfig big_a1 = parse_config(R"({"exponents": {"a1": 0.6, "a2": 0.1, "a3": 0.11}})");
  rep = validate_config(big_a1);
  REQUIRE_FALSE(rep.ok);
  REQUIRE(has_error_containing(rep, "a1 < 0.5"));

  // The same exponents are admissible for the delayed variant.
  RunConfig delayed = parse_config(
      R"({"algorithm": "algorithm2", "delay": 1,
          "exponents": {"a1": 0.6, "a2": 0.1, "a3": 0.11}})");
  REQUIRE(validate_config(delayed).ok);

  RunConfig weak_sum = parse_config(R"({"exponents": {"a1": 0.40, "a2": 0.10, "a3": 0.11}})");
  rep = validate_config(weak_sum);
  REQUIRE_FALSE(rep.ok);
  REQUIRE(has_error_containing(rep, "a1 - 2*a2 - 2*a3 > 0"));
}

TEST_CASE("validation enforces run shape and algorithm pairing", "[config]") {
  RunConfig c = parse_config("{}");

  c.horizon = 0;
  REQUIRE(has_error_containing(validate_config(c), "horizon"));
  c.horizon = 100;

  c.runs = 0;
  REQUIRE(has_error_containing(validate_config(c), "runs"));
  c.runs = 1;

  c.delta_scale = 0.0;
  REQUIRE(has_error_containing(validate_config(c), "delta_scale"));
  c.delta_scale = 1.5;
  REQUIRE(has_error_containing(validate_config(c), "delta_scale"));
  c.delta_scale = 1.0;
  REQUIRE(validate_config(c).ok);

  c.algorithm = "algorithm2";
  c.delay = 0;
  REQUIRE(has_error_containing(validate_config(c), "delay >= 1"));
  c.delay = 1;
  REQUIRE(validate_config(c).ok);

  c.algorithm = "algorithm1";
  c.delay = 2;
  REQUIRE(has_error_containing(validate_config(c), "delay"));
  c.delay = 0;

  c.algorithm = "gradient_descent";
  REQUIRE(has_error_containing(validate_config(c), "gradient_descent"));
  c.algorithm = "algorithm1";

  c.mirror = "entropy";
  REQUIRE(has_error_containing(validate_config(c), "euclidean"));
  c.mirror = "euclidean";

  c.assertion_mode = "panic";
  REQUIRE(has_error_containing(validate_config(c), "assertion_mode"));
  c.assertion_mode = "record";
  REQUIRE(validate_config(c).ok);

  c.oracle.tol = 0.0;
  REQUIRE(has_error_containing(validate_config(c), "tol"));
  c.oracle.tol = 1e-9;

  REQUIRE_THROWS_AS(parse_assertion_mode("panic"), ConfigError);
  REQUIRE(parse_assertion_mode("record") == AssertionMode::Record);
  REQUIRE(parse_assertion_mode("abort") == AssertionMode::Abort);
}

TEST_CASE("closed form comparator is restricted to the production game", "[config]") {
  RunConfig c = parse_config(R"({"comparator": "closed_form"})");
  ValidationReport rep = validate_config(c);
  REQUIRE(rep.ok);
  REQUIRE_FALSE(rep.notes.empty());  // flagged as an approximation, not an equilibrium

  c = parse_config(R"({"game": {"kind": "quadratic"}, "comparator": "closed_form"})");
  rep = validate_config(c);
  REQUIRE_FALSE(rep.ok);
  REQUIRE(has_error_containing(rep, "cournot"));

  c.comparator = "nash";
  REQUIRE(has_error_containing(validate_config(c), "comparator"));
}

TEST_CASE("game builder forwards every parameter", "[config]") {
  RunConfig c = parse_config(R"({
    "game": {"kind": "quadratic", "n_players": 3, "dim": 2, "coupling": 0.1,
             "strength": 0.4, "box_halfwidth": 2.0, "sum_cap": 1.5,
             "wobble": 0.25, "period": 30.0}
  })");
  GameSpec g = build_game(c);
  REQUIRE(g.n_players == 3);
  REQUIRE(g.total_dim() == 6);
  REQUIRE(g.m == 1);
  REQUIRE(g.sets[0].contains(Vec::Constant(2, 2.0), 1e-12));
  REQUIRE_FALSE(g.sets[0].contains(Vec::Constant(2, 2.1), 1e-6));
  // Wobbled target: cost minimum moves with t when coupling is ignored.
  Vec x = Vec::Zero(6);
  REQUIRE(g.cost(0, 1.0, x) != g.cost(0, 20.0, x));

  RunConfig cc = parse_config(R"({
    "game": {"kind": "cournot", "n_players": 6, "box_lo": 0.0, "box_hi": 10.0,
             "base_capacity": 4.0}
  })");
  GameSpec prod = build_game(cc);
  REQUIRE(prod.n_players == 6);
  REQUIRE(prod.sets.size() == 6);
  REQUIRE(prod.sets[0].contains(Vec::Constant(1, 10.0), 1e-12));

  RunConfig bad;
  bad.game_kind = "rps";
  REQUIRE_THROWS_AS(build_game(bad), ConfigError);
  REQUIRE(has_error_containing(validate_config(bad), "rps"));
}

TEST_CASE("graph builder handles every kind and rejects bad matrices", "[config]") {
  RunConfig c = parse_config(R"({"graph": "ring"})");
  WeightMatrix ring = build_graph(c, 4);
  REQUIRE(ring.sigma_m == Catch::Approx(1.0 / 3.0).margin(1e-12));

  c = parse_config(R"({"graph": {"kind": "star"}})");
  WeightMatrix star = build_graph(c, 5);
  REQUIRE(star.sigma_m == Catch::Approx(0.8).margin(1e-12));

  c = parse_config(R"({"graph": {"kind": "complete", "rule": "uniform"}})");
  WeightMatrix uni = build_graph(c, 3);
  REQUIRE(uni.sigma_m <= 1e-12);

  c = parse_config(R"({"graph": {"kind": "edges", "edges": [[1, 2], [2, 3], [3, 1]]}})");
  WeightMatrix tri = build_graph(c, 3);
  REQUIRE(tri.sigma_m < 1.0);

  c = parse_config(R"({"graph": {"kind": "matrix",
                                 "rows": [[0.8, 0.2], [0.2, 0.8]]}})");
  WeightMatrix m2 = build_graph(c, 2);
  REQUIRE(m2.sigma_m == Catch::Approx(0.6).margin(1e-12));

  REQUIRE_THROWS_WITH(build_graph(c, 3), ContainsSubstring("player count"));

  c = parse_config(R"({"graph": {"kind": "matrix", "rows": [[0.8, 0.2], [0.2]]}})");
  REQUIRE_THROWS_WITH(build_graph(c, 2), ContainsSubstring("length"));

  c = parse_config(R"({"graph": {"kind": "matrix",
                                 "rows": [[0.9, 0.2], [0.2, 0.8]]}})");
  REQUIRE_THROWS_AS(build_graph(c, 2), NonStochastic);

  c = parse_config(R"({"graph": {"kind": "torus"}})");
  REQUIRE_THROWS_WITH(build_graph(c, 4), ContainsSubstring("torus"));

  c = parse_config(R"({"graph": {"kind": "ring", "rule": "gossip"}})");
  REQUIRE_THROWS_WITH(build_graph(c, 4), ContainsSubstring("gossip"));

  // Malformed edge lists fail at parse time.
  REQUIRE_THROWS_WITH(parse_config(R"({"graph": {"kind": "edges", "edges": [[1, 2, 3]]}})"),
                      ContainsSubstring("pairs"));
}

TEST_CASE("schedule builder scales the exploration radius off the game geometry", "[config]") {
  RunConfig c = parse_config("{}");  // production game, box [0, 30] -> inner radius 15
  GameSpec g = build_game(c);
  Schedule s1 = build_schedule(c, g);
  REQUIRE(s1.r_min() == Catch::Approx(15.0).margin(1e-12));
  REQUIRE(s1.variant() == Variant::DelayFree);
  REQUIRE(s1.tau() == 0);

  c.delta_scale = 0.5;
  REQUIRE(build_schedule(c, g).r_min() == Catch::Approx(7.5).margin(1e-12));

  c = parse_config(R"({"preset": "figure3"})");
  Schedule s2 = build_schedule(c, g);
  REQUIRE(s2.variant() == Variant::Delayed);
  REQUIRE(s2.tau() == 1);

  c.algorithm = "newton";
  REQUIRE_THROWS_AS(build_schedule(c, g), ConfigError);
}

// ---------------------------------------------------------------------------
// [experiment]
// ---------------------------------------------------------------------------

namespace {

// Small production-game config the heavier driver tests share.
RunConfig small_cournot(const fs::path& out, long horizon = 150, int runs = 2) {
  RunConfig c = parse_config("{}");
  c.horizon = horizon;
  c.runs = runs;
  c.seed = 42;
  c.oracle.probes = 16;  // keep the per-round residual certificate cheap
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("minimal experiment writes every artifact with one aggregate row", "[experiment]") {
  fs::path dir = fresh_dir("gneseek_exp_minimal");
  RunConfig c = parse_config(R"({
    "game": {"kind": "quadratic", "n_players": 1, "dim": 1, "coupling": 0.0,
             "strength": 0.5, "sum_cap": 0.5},
    "horizon": 1, "runs": 1
  })");
  c.out_dir = dir.string();
  ExperimentSummary sum = run_experiment(c);

  for (const char* name : {"trajectory.csv", "trace_run0.csv", "regret_run0.csv",
                           "violation_run0.csv", "aggregate.csv", "summary.txt"})
    REQUIRE(fs::exists(dir / name));

  std::string agg = slurp(dir / "aggregate.csv");
  REQUIRE(line_count(agg) == 2);  // header + exactly one (round, player) row
  REQUIRE(first_line(agg) == "t,player,mean_regret_over_t,stderr,mean_violation_over_t,stderr");

  REQUIRE(line_count(slurp(dir / "trace_run0.csv")) == 2);
  REQUIRE(line_count(slurp(dir / "violation_run0.csv")) == 2);
  REQUIRE(line_count(slurp(dir / "regret_run0.csv")) == 2);
  REQUIRE_FALSE(fs::exists(dir / "closed_form_compare.csv"));  // production game only

  REQUIRE(sum.violation_rate.mean.size() == 1);
  REQUIRE(std::isnan(sum.violation_rate.stderr_[0]));  // single run: no spread estimate
  REQUIRE(sum.regret_rate.size() == 1);
  REQUIRE(sum.assertion_violations == 0);
  fs::remove_all(dir);
}

TEST_CASE("experiment outputs have stable schemas and exact row counts", "[experiment]") {
  fs::path dir = fresh_dir("gneseek_exp_schema");
  RunConfig c = small_cournot(dir, 40, 2);
  ExperimentSummary sum = run_experiment(c);

  std::string trace = slurp(dir / "trace_run0.csv");
  REQUIRE(first_line(trace) == "t,player,x_0,z_0,lambda_0,f_value,g_0,consensus_err");
  REQUIRE(line_count(trace) == 1 + 40 * 20);

  std::string regret = slurp(dir / "regret_run1.csv");
  REQUIRE(first_line(regret) == "t,player,cum_regret,regret_over_t");
  REQUIRE(line_count(regret) == 1 + 40 * 20);

  std::string viol = slurp(dir / "violation_run0.csv");
  REQUIRE(first_line(viol) == "t,violation_norm,violation_over_t");
  REQUIRE(line_count(viol) == 1 + 40);

  std::string agg = slurp(dir / "aggregate.csv");
  REQUIRE(line_count(agg) == 1 + 40 * 20);

  std::string compare = slurp(dir / "closed_form_compare.csv");
  REQUIRE(first_line(compare) == "t,gap_l2,gap_linf");
  REQUIRE(line_count(compare) == 1 + 40);

  // Runs differ only through the run index, and they do differ.
  REQUIRE(slurp(dir / "trace_run0.csv") != slurp(dir / "trace_run1.csv"));

  // Assertion counters: every committed round of both runs was checked.
  REQUIRE(sum.assertions_checked == 2 * 40 * 20 * 6);
  REQUIRE(sum.assertion_violations == 0);

  // With two runs the spread estimate exists.
  REQUIRE_FALSE(std::isnan(sum.violation_rate.stderr_.back()));
  fs::remove_all(dir);
}

TEST_CASE("same config and seed give byte-identical outputs", "[experiment]") {
  fs::path a = fresh_dir("gneseek_exp_detA");
  fs::path b = fresh_dir("gneseek_exp_detB");
  const std::vector<std::string> files = {
      "trajectory.csv", "closed_form_compare.csv", "trace_run0.csv",  "trace_run1.csv",
      "regret_run0.csv", "violation_run0.csv",     "aggregate.csv",   "summary.txt"};

  run_experiment(small_cournot(a, 60, 2));
  run_experiment(small_cournot(b, 60, 2));
  for (const auto& f : files) REQUIRE(slurp(a / f) == slurp(b / f));

  // Re-running into the same directory (warm cache) rewrites the same bytes.
  std::vector<std::string> before;
  for (const auto& f : files) before.push_back(slurp(a / f));
  run_experiment(small_cournot(a, 60, 2));
  for (std::size_t k = 0; k < files.size(); ++k) REQUIRE(slurp(a / files[k]) == before[k]);

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("benchmark trajectory cache is reused, extended, and self-heals", "[experiment]") {
  fs::path dir = fresh_dir("gneseek_exp_cache");
  RunConfig c = small_cournot(dir, 30, 1);

  std::ostringstream log1;
  run_experiment(c, &log1);
  REQUIRE_THAT(log1.str(), ContainsSubstring("solving"));

  std::ostringstream log2;
  run_experiment(c, &log2);
  REQUIRE_THAT(log2.str(), ContainsSubstring("reusing cache"));
  REQUIRE_THAT(log2.str(), !ContainsSubstring("solving"));

  // A longer horizon outgrows the cache and triggers a fresh solve.
  RunConfig longer = small_cournot(dir, 45, 1);
  std::ostringstream log3;
  run_experiment(longer, &log3);
  REQUIRE_THAT(log3.str(), ContainsSubstring("solving"));

  // A corrupted fingerprint line invalidates the cache; the rewritten file
  // carries the same rows as before (deterministic recompute).
  std::string cached = slurp(dir / "trajectory.csv");
  {
    std::ofstream out(dir / "trajectory.csv", std::ios::binary);
    out << "# trajectory game=other\n" << cached.substr(cached.find('\n') + 1);
  }
  std::ostringstream log4;
  run_experiment(longer, &log4);
  REQUIRE_THAT(log4.str(), ContainsSubstring("solving"));
  REQUIRE(slurp(dir / "trajectory.csv") == cached);

  // A truncated data row is treated as a miss, not a crash.
  {
    std::ofstream out(dir / "trajectory.csv", std::ios::binary);
    out << cached.substr(0, cached.size() / 2);
  }
  std::ostringstream log5;
  run_experiment(longer, &log5);
  REQUIRE_THAT(log5.str(), ContainsSubstring("solving"));
  REQUIRE(slurp(dir / "trajectory.csv") == cached);
  fs::remove_all(dir);
}

TEST_CASE("invalid configs abort the run with every problem listed", "[experiment]") {
  RunConfig c = parse_config("{}");
  c.delta_scale = 2.0;
  c.runs = 0;
  try {
    run_experiment(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    REQUIRE_THAT(msg, ContainsSubstring("invalid config"));
    REQUIRE_THAT(msg, ContainsSubstring("delta_scale"));
    REQUIRE_THAT(msg, ContainsSubstring("runs"));
  }
}

TEST_CASE("experiment summary reports benchmark and trend quantities", "[experiment]") {
  fs::path dir = fresh_dir("gneseek_exp_summary");
  RunConfig c = small_cournot(dir, 300, 1);
  ExperimentSummary sum = run_experiment(c);

  // Complete Metropolis graph mixes almost exactly.
  REQUIRE(sum.sigma_m <= 1e-12);
  // The implemented cost has a constant-in-x pseudo-gradient, so its
  // equilibrium trajectory is the fixed zero-production corner: no path
  // drift, no active multiplier, and residual certificates stay feasible.
  REQUIRE(sum.theta_path <= 1e-6);
  REQUIRE(sum.lambda_star_max <= 1e-6);
  REQUIRE(sum.worst_residual >= -1e-6);
  // The closed-form candidate differs from the solver equilibrium.
  REQUIRE(sum.closed_form_max_gap > 1.0);

  // Violation starts large (random plays around mid-box overshoot the cap)
  // and its time-average shrinks as the duals engage.
  const auto& v = sum.violation_rate.mean;
  REQUIRE(v.front() > 10.0);
  REQUIRE(v.back() < 0.5 * v.front());

  std::string summary = slurp(dir / "summary.txt");
  REQUIRE_THAT(summary, ContainsSubstring("sigma_m"));
  REQUIRE_THAT(summary, ContainsSubstring("benchmark path length"));
  REQUIRE_THAT(summary, ContainsSubstring("assertions: checked="));
  REQUIRE_THAT(summary, ContainsSubstring("violations=0"));

  // The closed-form comparator swaps the regret baseline and the path length.
  fs::path dir2 = fresh_dir("gneseek_exp_summary_cf");
  RunConfig cf = small_cournot(dir2, 150, 1);
  cf.comparator = "closed_form";
  ExperimentSummary cfsum = run_experiment(cf);
  std::vector<Vec> closed;
  for (long t = 1; t <= 151; ++t)
    closed.push_back(cournot_closed_form_gne(static_cast<double>(t), cf.cournot));
  REQUIRE(cfsum.theta_path ==
          Catch::Approx(path_variation(closed, 150).back()).margin(1e-12));
  REQUIRE(cfsum.theta_path > 10.0);

  fs::remove_all(dir);
  fs::remove_all(dir2);
}
