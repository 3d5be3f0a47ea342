// Command-line front end: run experiments, validate configs, precompute the
// centralized benchmark trajectory, and list the built-in presets.

#include "gneseek/gneseek.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <string>

namespace {

struct CliOverrides {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  long horizon = 0;
  int runs = 0;
};

// Resolution order: preset (or built-in defaults), then a config file, then
// explicit flags.  Each CLI11 option records whether it was actually given.
gneseek::RunConfig assemble_config(const CLI::App& cmd, const CliOverrides& ov) {
  gneseek::RunConfig cfg;
  if (cmd.count("--preset")) cfg = gneseek::preset_config(ov.preset);
  if (cmd.count("--config")) cfg = gneseek::load_config_file(ov.config_path);
  if (cmd.count("--seed")) cfg.seed = ov.seed;
  if (cmd.count("--horizon")) cfg.horizon = ov.horizon;
  if (cmd.count("--runs")) cfg.runs = ov.runs;
  if (cmd.count("--out")) cfg.out_dir = ov.out_dir;
  return cfg;
}

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
  auto* config = cmd->add_option("--config", ov.config_path, "JSON config file");
  auto* preset = cmd->add_option("--preset", ov.preset, "named scenario (see `presets`)");
  config->excludes(preset);
  cmd->add_option("--seed", ov.seed, "master seed override");
  cmd->add_option("--horizon", ov.horizon, "number of rounds override");
  cmd->add_option("--runs", ov.runs, "number of repeated runs override");
  cmd->add_option("--out", ov.out_dir, "output directory override");
}

int do_validate(const CLI::App& cmd, const CliOverrides& ov) {
  gneseek::RunConfig cfg = assemble_config(cmd, ov);
  gneseek::ValidationReport rep = gneseek::validate_config(cfg);
  for (const auto& e : rep.errors) std::cout << "error: " << e << '\n';
  for (const auto& n : rep.notes) std::cout << "note: " << n << '\n';
  std::cout << (rep.ok ? "config ok" : "config invalid") << '\n';
  return rep.ok ? 0 : 2;
}

int do_run(const CLI::App& cmd, const CliOverrides& ov) {
  gneseek::RunConfig cfg = assemble_config(cmd, ov);
  gneseek::ExperimentSummary sum = gneseek::run_experiment(cfg, &std::cout);
  std::cout << "wrote " << cfg.out_dir << "/summary.txt\n";
  std::cout << "final time-averaged violation: "
            << gneseek::format_double(sum.violation_rate.mean.back()) << '\n';
  double worst = 0.0;
  for (const auto& ms : sum.regret_rate) worst = std::max(worst, ms.mean.back());
  std::cout << "final time-averaged regret (worst player): " << gneseek::format_double(worst)
            << '\n';
  if (sum.assertion_violations > 0)
    std::cout << "WARNING: " << sum.assertion_violations
              << " recorded invariant violations (see summary.txt)\n";
  return 0;
}

int do_oracle(const CLI::App& cmd, const CliOverrides& ov) {
  gneseek::RunConfig cfg = assemble_config(cmd, ov);
  gneseek::ValidationReport rep = gneseek::validate_config(cfg);
  if (!rep.ok) {
    for (const auto& e : rep.errors) std::cerr << "error: " << e << '\n';
    return 2;
  }
  gneseek::GameSpec game = gneseek::build_game(cfg);
  gneseek::SolverOptions opt = gneseek::build_solver_options(cfg);
  const long count = cfg.horizon + std::max(cfg.delay, 1L);
  std::filesystem::create_directories(cfg.out_dir);
  std::string path = (std::filesystem::path(cfg.out_dir) / "trajectory.csv").string();
  auto traj = gneseek::ensure_trajectory(game, opt, count, path, &std::cout);
  double lambda_max = 0.0, worst = std::numeric_limits<double>::infinity();
  double theta = 0.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    lambda_max = std::max(lambda_max, traj[s].lambda_star.norm());
    worst = std::min(worst, traj[s].residual);
    if (s + 1 < traj.size()) theta += (traj[s + 1].x_star - traj[s].x_star).norm();
  }
  std::cout << "rounds: " << traj.size() << '\n';
  std::cout << "path length: " << gneseek::format_double(theta) << '\n';
  std::cout << "max multiplier norm: " << gneseek::format_double(lambda_max) << '\n';
  std::cout << "worst residual certificate: " << gneseek::format_double(worst) << '\n';
  std::cout << "wrote " << path << '\n';
  return 0;
}

int do_presets() {
  std::cout << "figure1     delay-free benchmark on the production game (T=5000, R=10)\n";
  std::cout << "figure2     alias of figure1; the run writes both regret and violation\n";
  std::cout << "figure3     one-round-delay benchmark on the production game\n";
  std::cout << "figure4     alias of figure3\n";
  std::cout << "corollary2  rate-optimal exponents (3/7, 0, 1/7), shorter horizon\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized one-point bandit learning of generalized Nash equilibria"};
  app.require_subcommand(1);

  CliOverrides run_ov, val_ov, orc_ov;
  CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment and write its outputs");
  add_common_options(run_cmd, run_ov);
  CLI::App* val_cmd = app.add_subcommand("validate", "check a config and report every problem");
  add_common_options(val_cmd, val_ov);
  CLI::App* orc_cmd =
      app.add_subcommand("oracle", "compute only the centralized benchmark trajectory");
  add_common_options(orc_cmd, orc_ov);
  CLI::App* pre_cmd = app.add_subcommand("presets", "list the built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(*run_cmd, run_ov);
    if (val_cmd->parsed()) return do_validate(*val_cmd, val_ov);
    if (orc_cmd->parsed()) return do_oracle(*orc_cmd, orc_ov);
    if (pre_cmd->parsed()) return do_presets();
  } catch (const gneseek::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gneseek::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
