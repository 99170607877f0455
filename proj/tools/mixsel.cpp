// Command-line front end: run experiments, expand sweeps, print population
// oracles, diagnose finished traces, and generate synthetic embedding
// fixtures.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mixsel/config.hpp"
#include "mixsel/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string algo;
  double delta_l = -1.0;
  double sigma = -1.0;
  int rff_pairs = -1;
  double fidelity_weight = -1.0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--out", flags.out_dir, "output directory override");
  cmd->add_option("--seed", flags.seed, "single-seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--jobs", flags.jobs, "worker pool size override");
  cmd->add_option("--algo", flags.algo, "algorithm override");
  cmd->add_option("--delta-l", flags.delta_l, "mixture-ucb delta_L override");
  cmd->add_option("--sigma", flags.sigma, "kernel bandwidth override");
  cmd->add_option("--rff-pairs", flags.rff_pairs,
                  "random-feature pair count override");
  cmd->add_option("--fidelity-weight", flags.fidelity_weight,
                  "linear fidelity weight override");
}

mixsel::ExperimentConfig load_with_overrides(const CommonFlags& flags) {
  mixsel::ExperimentConfig cfg =
      mixsel::load_experiment_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed_set) cfg.seeds = {flags.seed};
  if (flags.jobs > 0) cfg.jobs = flags.jobs;
  if (!flags.algo.empty()) cfg.algorithms = {flags.algo};
  if (flags.delta_l >= 0.0) cfg.ucb_delta_l = flags.delta_l;
  if (flags.sigma > 0.0) cfg.objective.sigma = flags.sigma;
  if (flags.rff_pairs >= 0) cfg.objective.rff_pairs = flags.rff_pairs;
  if (flags.fidelity_weight >= 0.0)
    cfg.objective.fidelity_weight = flags.fidelity_weight;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online mixture selection over candidate sample generators"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, oracle_flags, diag_flags, gen_flags;
  double diag_gamma = 0.0;
  double diag_delta = 0.05;
  std::string diag_traces;

  CLI::App* run = app.add_subcommand("run", "execute one experiment config");
  add_common_flags(run, run_flags);

  CLI::App* sweep =
      app.add_subcommand("sweep", "expand sweep axes and run each combo");
  add_common_flags(sweep, sweep_flags);

  CLI::App* oracle = app.add_subcommand(
      "oracle", "print the population-optimal mixture for a config");
  add_common_flags(oracle, oracle_flags);

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "run diagnostics over existing traces");
  add_common_flags(diagnose, diag_flags);
  diagnose->add_option("--traces", diag_traces,
                       "trace directory (defaults to the config out_dir)");
  diagnose->add_option("--gamma", diag_gamma, "count-floor gamma");
  diagnose->add_option("--delta", diag_delta, "count-floor confidence");

  CLI::App* gen = app.add_subcommand(
      "gen-synthetic", "write embedding fixtures from Gaussian specs");
  add_common_flags(gen, gen_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      const mixsel::ExperimentConfig cfg = load_with_overrides(run_flags);
      mixsel::run_experiment(cfg, cfg.out_dir);
      std::printf("wrote %s\n", cfg.out_dir.c_str());
    } else if (sweep->parsed()) {
      const mixsel::ExperimentConfig cfg = load_with_overrides(sweep_flags);
      mixsel::run_sweep(cfg, cfg.out_dir);
      std::printf("wrote %s\n", cfg.out_dir.c_str());
    } else if (oracle->parsed()) {
      const mixsel::ExperimentConfig cfg = load_with_overrides(oracle_flags);
      const mixsel::BanditConfig bandit =
          mixsel::materialize_bandit_config(cfg);
      const auto pop = mixsel::build_population_oracle(cfg, bandit,
                                                       cfg.seeds.front());
      if (!pop)
        throw mixsel::ConfigError(
            "population oracle is not computable for this config");
      std::printf("alpha_star = (");
      for (Eigen::Index i = 0; i < pop->alpha_star.size(); ++i)
        std::printf("%s%.6f", i ? ", " : "", pop->alpha_star(i));
      std::printf(")\nF_star = %.8f\n", pop->optimum);
    } else if (diagnose->parsed()) {
      const mixsel::ExperimentConfig cfg = load_with_overrides(diag_flags);
      const std::string dir =
          diag_traces.empty() ? cfg.out_dir : diag_traces;
      const std::string report =
          mixsel::diagnose_traces(cfg, dir, diag_gamma, diag_delta);
      std::fputs(report.c_str(), stdout);
      if (report.find("overall: pass") == std::string::npos) return 3;
    } else if (gen->parsed()) {
      const mixsel::ExperimentConfig cfg = load_with_overrides(gen_flags);
      mixsel::generate_fixtures(cfg, cfg.out_dir);
      std::printf("wrote fixtures to %s\n", cfg.out_dir.c_str());
    }
  } catch (const mixsel::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
