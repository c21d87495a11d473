#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "piml/errors.hpp"
#include "piml/runner.hpp"

namespace {

struct Flags {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "override the config seed");
  cmd->add_option("--jobs", f.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
}

piml::RunOptions options(const Flags& f) {
  piml::RunOptions o;
  o.seed = f.seed;
  o.jobs = f.jobs;
  o.out = f.out;
  o.log = &std::cerr;
  return o;
}

void print_notices(const nlohmann::json& summary) {
  if (summary.contains("notices"))
    for (const auto& n : summary["notices"]) std::cerr << "notice: " << n.get<std::string>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed learning lab: training, conditioning and error studies"};
  app.require_subcommand(1);

  Flags flags;
  std::string cfg_arg, dir_arg;

  auto* run = app.add_subcommand("run", "run one configuration or preset");
  run->add_option("config", cfg_arg, "config file or preset name")->required();
  add_flags(run, flags);

  auto* sweep = app.add_subcommand("sweep", "run a config over sweep.values of sweep.variable");
  sweep->add_option("config", cfg_arg, "config file or preset name")->required();
  add_flags(sweep, flags);

  auto* cond = app.add_subcommand("cond", "Gram-matrix conditioning only (writes cond.csv)");
  cond->add_option("config", cfg_arg, "config file or preset name")->required();
  add_flags(cond, flags);

  auto* verify = app.add_subcommand("verify", "recompute summary.json from the CSVs of a run directory");
  verify->add_option("run-dir", dir_arg, "run or sweep directory")->required();

  auto* list = app.add_subcommand("list", "print preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& name : piml::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const piml::VerifyReport rep = piml::verify_dir(dir_arg);
      for (const auto& p : rep.problems) std::cout << "mismatch: " << p << "\n";
      std::cout << (rep.ok ? "ok" : "FAILED") << ": " << rep.checked << " summary file(s) checked\n";
      return rep.ok ? 0 : 1;
    }
    const piml::RunOptions opts = options(flags);
    const piml::Config cfg = piml::load_config(cfg_arg, opts);
    piml::RunOutcome outcome;
    if (sweep->parsed()) outcome = piml::sweep_config(cfg, opts);
    else outcome = piml::run_config(cfg, opts, cond->parsed());
    print_notices(outcome.summary);
    std::cout << outcome.dir << "\n";
    return outcome.diverged ? 3 : 0;
  } catch (const piml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
