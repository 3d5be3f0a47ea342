#pragma once

#include "gneseek/common.hpp"
#include "gneseek/cournot.hpp"
#include "gneseek/equilibrium.hpp"
#include "gneseek/game.hpp"
#include "gneseek/graph.hpp"
#include "gneseek/learner.hpp"
#include "gneseek/schedules.hpp"

#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gneseek {

// Experiment configuration: a plain value type, JSON loading with strict key
// checking, named presets for the benchmark scenarios, and builders that turn
// a config into the live objects (game, graph, schedule, solver options).

struct QuadraticSettings {
  int n_players = 4;
  int dim = 2;
  double coupling = 0.25;
  double strength = 0.5;
  double box_halfwidth = 5.0;
  double sum_cap = 0.0;  // > 0 switches on the shared budget constraint
  double wobble = 0.0;   // target drift amplitude
  double period = 50.0;  // target drift period
};

struct GraphSettings {
  std::string kind = "complete";  // complete | ring | star | edges | matrix
  EdgeList edges;                 // 1-based endpoints, kind == "edges"
  std::vector<std::vector<double>> rows;  // kind == "matrix"
  std::string rule = "metropolis";        // metropolis | uniform
};

struct OracleSettings {
  double tol = 1e-9;
  long max_iter = 100000;
  long probes = 128;  // feasible probes per round for the residual certificate
};

struct RunConfig {
  std::string name = "custom";
  std::string game_kind = "cournot";  // cournot | quadratic
  CournotParams cournot;
  QuadraticSettings quadratic;
  GraphSettings graph;
  std::string algorithm = "algorithm1";  // algorithm1 | algorithm2
  long delay = 0;                        // feedback delay, algorithm2 only
  double a1 = 0.45, a2 = 0.10, a3 = 0.11;
  double delta_scale = 1.0;  // exploration radius as a fraction of the largest safe value
  long horizon = 5000;
  int runs = 10;
  std::uint64_t seed = 42;
  std::string assertion_mode = "abort";  // abort | record
  std::string mirror = "euclidean";      // custom Bregman mirrors are built in code
  std::string comparator = "vi";         // vi | closed_form (cournot only)
  OracleSettings oracle;
  std::string out_dir = "out";
};

inline std::vector<std::string> preset_names() {
  return {"figure1", "figure2", "figure3", "figure4", "corollary2"};
}

// Named scenarios.  figure1/figure2 are the delay-free benchmark on the
// production game (they share one experiment; the runner always writes both
// the regret and the violation outputs).  figure3/figure4 repeat it with a
// one-round feedback delay.  corollary2 uses the rate-optimal exponents on a
// shorter horizon.
inline RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.name = name;
  if (name == "figure1" || name == "figure2") return c;
  if (name == "figure3" || name == "figure4") {
    c.algorithm = "algorithm2";
    c.delay = 1;
    return c;
  }
  if (name == "corollary2") {
    auto [a1, a2, a3] = Schedule::corollary2_exponents();
    c.a1 = a1;
    c.a2 = a2;
    c.a3 = a3;
    c.horizon = 2000;
    c.runs = 3;
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

namespace detail {

using nlohmann::json;

inline long line_of_byte(const std::string& text, std::size_t byte) {
  long line = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k)
    if (text[k] == '\n') ++line;
  return line;
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || (it.key() == k);
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline double want_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

inline long want_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  return v.get<long>();
}

inline std::string want_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + " must be a string");
  return v.get<std::string>();
}

inline void apply_game(const json& v, RunConfig& c, const std::string& src) {
  if (v.is_string()) {
    c.game_kind = v.get<std::string>();
    return;
  }
  if (!v.is_object()) throw ConfigError(src + ": 'game' must be a string or an object");
  check_keys(v,
             {"kind", "n_players", "box_lo", "box_hi", "base_capacity", "dim", "coupling",
              "strength", "box_halfwidth", "sum_cap", "wobble", "period"},
             src + ": game");
  if (!v.contains("kind")) throw ConfigError(src + ": game object needs a 'kind'");
  c.game_kind = want_string(v["kind"], src + ": game.kind");
  if (c.game_kind == "cournot") {
    if (v.contains("n_players"))
      c.cournot.n_players = static_cast<int>(want_integer(v["n_players"], src + ": game.n_players"));
    if (v.contains("box_lo")) c.cournot.box_lo = want_number(v["box_lo"], src + ": game.box_lo");
    if (v.contains("box_hi")) c.cournot.box_hi = want_number(v["box_hi"], src + ": game.box_hi");
    if (v.contains("base_capacity"))
      c.cournot.base_capacity = want_number(v["base_capacity"], src + ": game.base_capacity");
  } else if (c.game_kind == "quadratic") {
    QuadraticSettings& q = c.quadratic;
    if (v.contains("n_players"))
      q.n_players = static_cast<int>(want_integer(v["n_players"], src + ": game.n_players"));
    if (v.contains("dim")) q.dim = static_cast<int>(want_integer(v["dim"], src + ": game.dim"));
    if (v.contains("coupling")) q.coupling = want_number(v["coupling"], src + ": game.coupling");
    if (v.contains("strength")) q.strength = want_number(v["strength"], src + ": game.strength");
    if (v.contains("box_halfwidth"))
      q.box_halfwidth = want_number(v["box_halfwidth"], src + ": game.box_halfwidth");
    if (v.contains("sum_cap")) q.sum_cap = want_number(v["sum_cap"], src + ": game.sum_cap");
    if (v.contains("wobble")) q.wobble = want_number(v["wobble"], src + ": game.wobble");
    if (v.contains("period")) q.period = want_number(v["period"], src + ": game.period");
  } else {
    throw ConfigError(src + ": game.kind must be 'cournot' or 'quadratic'");
  }
}

inline void apply_graph(const json& v, RunConfig& c, const std::string& src) {
  if (v.is_string()) {
    c.graph.kind = v.get<std::string>();
    return;
  }
  if (!v.is_object()) throw ConfigError(src + ": 'graph' must be a string or an object");
  check_keys(v, {"kind", "edges", "rows", "rule"}, src + ": graph");
  if (!v.contains("kind")) throw ConfigError(src + ": graph object needs a 'kind'");
  c.graph.kind = want_string(v["kind"], src + ": graph.kind");
  if (v.contains("rule")) c.graph.rule = want_string(v["rule"], src + ": graph.rule");
  if (c.graph.kind == "edges") {
    if (!v.contains("edges") || !v["edges"].is_array())
      throw ConfigError(src + ": graph.edges must be an array of [i, j] pairs");
    c.graph.edges.clear();
    for (const auto& e : v["edges"]) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError(src + ": graph.edges entries must be [i, j] pairs");
      c.graph.edges.push_back({static_cast<int>(want_integer(e[0], src + ": graph edge")),
                               static_cast<int>(want_integer(e[1], src + ": graph edge"))});
    }
  } else if (c.graph.kind == "matrix") {
    if (!v.contains("rows") || !v["rows"].is_array())
      throw ConfigError(src + ": graph.rows must be an array of rows");
    c.graph.rows.clear();
    for (const auto& row : v["rows"]) {
      if (!row.is_array()) throw ConfigError(src + ": graph.rows entries must be arrays");
      std::vector<double> r;
      for (const auto& x : row) r.push_back(want_number(x, src + ": graph.rows entry"));
      c.graph.rows.push_back(std::move(r));
    }
  }
}

}  // namespace detail

// Parse a JSON config text.  A "preset" key seeds the defaults; every other
// key overrides one field.  Unknown keys are rejected so typos fail loudly.
inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(detail::line_of_byte(text, e.byte)) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(source + ": top level must be a JSON object");
  detail::check_keys(root,
                     {"preset", "name", "game", "graph", "algorithm", "delay", "exponents",
                      "delta_scale", "horizon", "runs", "seed", "assertion_mode", "mirror",
                      "comparator", "oracle", "out_dir"},
                     source);

  RunConfig c;
  if (root.contains("preset"))
    c = preset_config(detail::want_string(root["preset"], source + ": preset"));
  if (root.contains("name")) c.name = detail::want_string(root["name"], source + ": name");

  if (root.contains("game")) detail::apply_game(root["game"], c, source);
  if (root.contains("graph")) detail::apply_graph(root["graph"], c, source);
  if (root.contains("algorithm"))
    c.algorithm = detail::want_string(root["algorithm"], source + ": algorithm");
  if (root.contains("delay")) c.delay = detail::want_integer(root["delay"], source + ": delay");
  if (root.contains("exponents")) {
    const json& e = root["exponents"];
    if (!e.is_object()) throw ConfigError(source + ": 'exponents' must be an object");
    detail::check_keys(e, {"a1", "a2", "a3"}, source + ": exponents");
    if (e.contains("a1")) c.a1 = detail::want_number(e["a1"], source + ": exponents.a1");
    if (e.contains("a2")) c.a2 = detail::want_number(e["a2"], source + ": exponents.a2");
    if (e.contains("a3")) c.a3 = detail::want_number(e["a3"], source + ": exponents.a3");
  }
  if (root.contains("delta_scale"))
    c.delta_scale = detail::want_number(root["delta_scale"], source + ": delta_scale");
  if (root.contains("horizon"))
    c.horizon = detail::want_integer(root["horizon"], source + ": horizon");
  if (root.contains("runs"))
    c.runs = static_cast<int>(detail::want_integer(root["runs"], source + ": runs"));
  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_unsigned() && !s.is_number_integer())
      throw ConfigError(source + ": seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("assertion_mode"))
    c.assertion_mode = detail::want_string(root["assertion_mode"], source + ": assertion_mode");
  if (root.contains("mirror")) c.mirror = detail::want_string(root["mirror"], source + ": mirror");
  if (root.contains("comparator"))
    c.comparator = detail::want_string(root["comparator"], source + ": comparator");
  if (root.contains("oracle")) {
    const json& o = root["oracle"];
    if (!o.is_object()) throw ConfigError(source + ": 'oracle' must be an object");
    detail::check_keys(o, {"tol", "max_iter", "probes"}, source + ": oracle");
    if (o.contains("tol")) c.oracle.tol = detail::want_number(o["tol"], source + ": oracle.tol");
    if (o.contains("max_iter"))
      c.oracle.max_iter = detail::want_integer(o["max_iter"], source + ": oracle.max_iter");
    if (o.contains("probes"))
      c.oracle.probes = detail::want_integer(o["probes"], source + ": oracle.probes");
  }
  if (root.contains("out_dir"))
    c.out_dir = detail::want_string(root["out_dir"], source + ": out_dir");
  return c;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Builders: turn a validated config into live objects.

inline GameSpec build_game(const RunConfig& c) {
  if (c.game_kind == "cournot") return cournot_game(c.cournot);
  if (c.game_kind == "quadratic") {
    QuadraticGameOptions opt;
    opt.box_halfwidth = c.quadratic.box_halfwidth;
    opt.sum_cap = c.quadratic.sum_cap;
    opt.target_wobble = c.quadratic.wobble;
    opt.target_period = c.quadratic.period;
    return quadratic_test_game(c.quadratic.n_players, c.quadratic.dim, c.quadratic.coupling,
                               c.quadratic.strength, opt);
  }
  throw ConfigError("unknown game kind '" + c.game_kind + "'");
}

inline WeightMatrix build_graph(const RunConfig& c, int n_players) {
  const GraphSettings& gs = c.graph;
  WeightRule rule;
  if (gs.rule == "metropolis")
    rule = WeightRule::Metropolis;
  else if (gs.rule == "uniform")
    rule = WeightRule::UniformComplete;
  else
    throw ConfigError("unknown graph rule '" + gs.rule + "' (metropolis or uniform)");
  if (gs.kind == "complete") return build_weight_matrix(edges_complete(n_players), n_players, rule);
  if (gs.kind == "ring") return build_weight_matrix(edges_ring(n_players), n_players, rule);
  if (gs.kind == "star") return build_weight_matrix(edges_star(n_players), n_players, rule);
  if (gs.kind == "edges") return build_weight_matrix(gs.edges, n_players, rule);
  if (gs.kind == "matrix") {
    const int n = static_cast<int>(gs.rows.size());
    if (n != n_players) throw ConfigError("weight matrix size does not match the player count");
    Mat w(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(gs.rows[i].size()) != n)
        throw ConfigError("weight matrix rows must all have length n_players");
      for (int j = 0; j < n; ++j) w(i, j) = gs.rows[i][j];
    }
    return build_weight_matrix(w);
  }
  throw ConfigError("unknown graph kind '" + gs.kind +
                    "' (complete, ring, star, edges, matrix)");
}

inline Schedule build_schedule(const RunConfig& c, const GameSpec& game) {
  const double r_min = c.delta_scale * game.min_inner_radius();
  if (c.algorithm == "algorithm1") return Schedule(c.a1, c.a2, c.a3, r_min, Variant::DelayFree, 0);
  if (c.algorithm == "algorithm2")
    return Schedule(c.a1, c.a2, c.a3, r_min, Variant::Delayed, c.delay);
  throw ConfigError("unknown algorithm '" + c.algorithm + "' (algorithm1 or algorithm2)");
}

inline SolverOptions build_solver_options(const RunConfig& c) {
  SolverOptions opt;
  opt.tol = c.oracle.tol;
  opt.max_iter = c.oracle.max_iter;
  opt.probe_count = c.oracle.probes;
  return opt;
}

inline AssertionMode parse_assertion_mode(const std::string& s) {
  if (s == "abort") return AssertionMode::Abort;
  if (s == "record") return AssertionMode::Record;
  throw ConfigError("unknown assertion_mode '" + s + "' (abort or record)");
}

// ---------------------------------------------------------------------------
// Validation: collect every problem instead of stopping at the first one, so
// a `validate` invocation reports the full picture.

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
};

inline ValidationReport validate_config(const RunConfig& c) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };

  if (c.horizon < 1) fail("horizon must be at least 1");
  if (c.runs < 1) fail("runs must be at least 1");
  if (!(c.delta_scale > 0.0) || c.delta_scale > 1.0)
    fail("delta_scale must lie in (0, 1]: larger values can push plays outside their sets");
  if (c.algorithm == "algorithm1" && c.delay != 0)
    fail("algorithm1 is the delay-free update; set delay to 0 or use algorithm2");
  else if (c.algorithm == "algorithm2" && c.delay < 1)
    fail("algorithm2 needs delay >= 1; use algorithm1 for the delay-free setting");
  else if (c.algorithm != "algorithm1" && c.algorithm != "algorithm2")
    fail("unknown algorithm '" + c.algorithm + "' (algorithm1 or algorithm2)");
  if (c.assertion_mode != "abort" && c.assertion_mode != "record")
    fail("unknown assertion_mode '" + c.assertion_mode + "' (abort or record)");
  if (c.mirror != "euclidean")
    fail("unknown mirror '" + c.mirror + "' (only 'euclidean' is configurable; custom Bregman "
         "mirrors are constructed in code)");
  if (c.comparator != "vi" && c.comparator != "closed_form")
    fail("unknown comparator '" + c.comparator + "' (vi or closed_form)");
  if (c.comparator == "closed_form" && c.game_kind != "cournot")
    fail("the closed_form comparator is only defined for the cournot game");
  if (c.comparator == "closed_form")
    rep.notes.push_back(
        "closed_form comparator: a reported approximation, not the solver's equilibrium");
  if (!(c.oracle.tol > 0.0)) fail("oracle.tol must be positive");
  if (c.oracle.max_iter < 1) fail("oracle.max_iter must be at least 1");
  if (c.oracle.probes < 0) fail("oracle.probes must be non-negative");

  GameSpec game;
  bool have_game = false;
  try {
    game = build_game(c);
    have_game = true;
  } catch (const Error& e) {
    fail(std::string("game: ") + e.what());
  }
  if (have_game) {
    try {
      build_graph(c, game.n_players);
    } catch (const Error& e) {
      fail(std::string("graph: ") + e.what());
    }
    if (c.algorithm == "algorithm1" || c.algorithm == "algorithm2") {
      try {
        build_schedule(c, game);
      } catch (const Error& e) {
        fail(std::string("schedule: ") + e.what());
      }
    }
  }
  return rep;
}

}  // namespace gneseek
