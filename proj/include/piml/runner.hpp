#ifndef PIML_RUNNER_HPP_
#define PIML_RUNNER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "piml/config.hpp"
#include "piml/experiments.hpp"

namespace piml {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int jobs = 1;                       // concurrent sweep points
  std::string out;                    // overrides output.dir
  std::ostream* log = nullptr;        // progress lines; null for silence
};

struct RunOutcome {
  std::string dir;
  nlohmann::json summary;
  bool diverged = false;
};

// Accepts a preset name ("toy-hard-bc"), a path without extension
// ("presets/toy-hard-bc") or a file path.
std::string resolve_config_path(const std::string& arg);
Config load_config(const std::string& arg, const RunOptions& opts);

std::string presets_dir();
// Preset names in registry order.
const std::vector<std::string>& preset_names();

// `piml run` / `piml cond`: executes one configuration and writes its record.
RunOutcome run_config(const Config& cfg, const RunOptions& opts, bool cond_only = false);
// `piml sweep`: one record per sweep value under <out>/<var>=<value>, then
// sweep.csv, cond.csv and summary.json in <out>.
RunOutcome sweep_config(const Config& cfg, const RunOptions& opts);

// Summary fields derived from the CSVs of a run (or sweep) directory only.
nlohmann::json summarize_run_dir(const std::string& dir);
nlohmann::json summarize_sweep_dir(const std::string& dir);

struct VerifyReport {
  bool ok = true;
  int checked = 0;  // directories compared
  std::vector<std::string> problems;
};

// Recomputes the derived summary of `dir` (and of every sweep point below
// it) from the CSVs and compares it with summary.json.
VerifyReport verify_dir(const std::string& dir);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace piml

#endif  // PIML_RUNNER_HPP_
