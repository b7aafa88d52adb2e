// tacgrip: run scenarios, sweeps and the canned reproductions.
#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "tacgrip/harness/config.hpp"
#include "tacgrip/harness/run.hpp"

namespace {

using tacgrip::harness::RunOptions;
using tacgrip::harness::ScenarioConfig;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  int jobs = 1;
};

void apply(ScenarioConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) {
    if (*o.trials < 1) throw std::invalid_argument("--trials must be >= 1");
    cfg.trials = *o.trials;
  }
  if (o.out) cfg.output_dir = *o.out;
}

void print_summary(const tacgrip::harness::RunReport& rep) {
  std::cout << "scenario: " << tacgrip::harness::to_string(rep.scenario) << '\n';
  for (const auto& [k, v] : rep.aggregates) std::cout << k << ": " << v << '\n';
  std::cout << "report: " << rep.report_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile gripper simulation harness"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path;
  std::string experiment;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", ov.seed, "Top-level seed");
    cmd->add_option("--trials", ov.trials, "Trials (per object for singulation)");
    cmd->add_option("--out", ov.out, "Output directory");
    cmd->add_option("--jobs", ov.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* run_cmd = app.add_subcommand("run", "Run a scenario config");
  run_cmd->add_option("config", config_path, "YAML config")->required();
  add_common(run_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid config (sweep or scoop-analyze)");
  sweep_cmd->add_option("config", config_path, "YAML config")->required();
  add_common(sweep_cmd);

  auto* repro_cmd = app.add_subcommand("reproduce", "Canned desk-scale experiments");
  repro_cmd->add_option("experiment", experiment, "singulation | insertion")->required();
  add_common(repro_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunOptions opt{ov.jobs};
    if (*repro_cmd) {
      tacgrip::harness::Experiment e{};
      try {
        e = tacgrip::harness::parse_experiment(experiment);
      } catch (const std::invalid_argument& err) {
        std::cerr << "usage error: " << err.what() << '\n' << repro_cmd->help();
        return 2;
      }
      const std::string out = ov.out.value_or("out/reproduce_" + experiment);
      tacgrip::harness::reproduce(e, ov.seed.value_or(1), ov.trials.value_or(0), out, opt, std::cout);
      return 0;
    }
    ScenarioConfig cfg = tacgrip::harness::load_config(config_path);
    apply(cfg, ov);
    if (*sweep_cmd && cfg.scenario != tacgrip::harness::Scenario::kSweep &&
        cfg.scenario != tacgrip::harness::Scenario::kScoopAnalyze) {
      std::cerr << "usage error: sweep needs a config with scenario sweep or scoop-analyze\n";
      return 2;
    }
    print_summary(tacgrip::harness::run(cfg, opt));
    return 0;
  } catch (const tacgrip::harness::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
