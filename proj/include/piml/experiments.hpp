#ifndef PIML_EXPERIMENTS_HPP_
#define PIML_EXPERIMENTS_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "piml/config.hpp"
#include "piml/model.hpp"
#include "piml/parameters.hpp"
#include "piml/problems.hpp"

namespace piml {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  // Index of a named column; throws ConfigError naming the missing column.
  std::size_t column(const std::string& name) const;
};

CsvTable make_train_table();   // epoch, loss_total, loss_int, loss_s, loss_t, loss_data
CsvTable make_cond_table();    // sweep_var, value, lambda, kappa, lambda_min, lambda_max, near_zero_count
CsvTable make_errors_table();  // quantity, n, value

// Everything one experiment produces before it is written to disk. Extra
// tables are written as <name>.csv next to the standard ones.
struct RunTables {
  std::optional<CsvTable> train, cond, errors;
  std::vector<std::pair<std::string, CsvTable>> extra;
  std::optional<ParameterVector> theta;
  std::vector<std::string> notices;
  bool diverged = false;
  std::string status;
};

// Sweep context of a run: the swept variable and its value ("-" and 0
// outside sweeps).
struct SweepPoint {
  std::string variable = "-";
  double value = 0.0;
};

// Experiment kinds: train, cond, toy-hard-bc, split, quadrature-rates,
// wpinn, ntk-drift, lambda-strategies. cond_only restricts `train` configs to
// the Gram analysis.
RunTables execute_experiment(const Config& cfg, const SweepPoint& point, bool cond_only = false);

// Builders shared by the runner and the tests.
PdeProblem problem_from_config(const Config& cfg);
ModelPtr model_from_config(const Config& cfg, const PdeProblem& problem);
Vector initial_parameters(const Config& cfg, const Model& model);

// Applies a sweep value to the config key behind `variable`
// (K, beta, n_int, width, gamma, lambda). Throws ConfigError otherwise.
void apply_sweep_value(Config& cfg, const std::string& variable, double value);
const std::vector<std::string>& sweep_variables();

// sup |f| + sup |f_x| + sup |f_t| over [0, T] x dD, sampled at `samples`
// points split evenly between the endpoints (an estimate, not a bound).
double boundary_c1_norm(const std::function<Jet(const Point&)>& f, const SpaceTimeDomain& domain,
                        int samples = 2048);

}  // namespace piml

#endif  // PIML_EXPERIMENTS_HPP_
