#ifndef PIML_OPTIMIZERS_HPP_
#define PIML_OPTIMIZERS_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "piml/losses.hpp"
#include "piml/rng.hpp"

namespace piml {

enum class OptimizerKind { gd, sgd, minibatch, adam, newton_linear };
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct AdamParams {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // true: theta -= alpha m / sqrt(v + eps); false: alpha m / (sqrt(v) + eps).
  bool eps_inside_sqrt = true;
};

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::gd;
  long step = 0;
  Vector m, v;
  AdamParams adam;
};

// theta - eta * grad. Throws DivergenceError (carrying `epoch`) for a
// non-finite gradient.
Vector gd_step(std::span<const double> theta, std::span<const double> grad, double eta, long epoch = 0);

// One Adam update with bias correction; increments state.step.
void adam_step(OptimizerState& state, Vector& theta, std::span<const double> grad);

struct NewtonResult {
  Vector theta;
  bool ridge_used = false;
};

// theta - H^{-1} grad; adds a 1e-10 * max|H| ridge when H is singular.
NewtonResult newton_linear_step(std::span<const double> theta, const Matrix& hessian, std::span<const double> grad);

// Partition of 0..n-1 into consecutive batches of size m (last one shorter)
// after a shuffle drawn from rng.
std::vector<std::vector<std::size_t>> minibatch_partition(std::size_t n, std::size_t m, Rng& rng);

// Loss restricted to a subset of the interior points; the subset weights are
// scaled by n / |subset| so that the batch gradient is unbiased.
using BatchObjective = std::function<LossTerms(std::span<const double>, Vector*, std::span<const std::size_t>)>;
BatchObjective make_strong_batch_objective(const PdeProblem& problem, ModelPtr model, TrainingSet set,
                                           LossWeights weights);

enum class Schedule { constant, inv_sqrt };

struct TrainConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  Schedule schedule = Schedule::constant;
  AdamParams adam;
  long epochs = 1000;
  std::size_t batch = 0;        // 0: full batch
  double divergence_factor = 1e6;
  double target_loss = 0.0;     // stop once the loss reaches this value
  std::uint64_t seed = 0;
  long snapshot_every = 0;      // record parameter hashes every k epochs (0: first and last)
};

struct EpochRecord {
  long epoch = 0;
  LossTerms terms;
};

struct TrainRecord {
  std::vector<EpochRecord> epochs;
  std::vector<std::pair<long, std::uint64_t>> snapshot_hashes;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string message;
  bool ridge_used = false;
  LossTerms final_terms;
};

// Runs the optimizer from theta (updated in place). Epoch e records the loss
// at the parameters reached after e epochs; entry 0 is the initial loss.
// newton_linear requires `hessian`; minibatching requires `batch_objective`.
TrainRecord train(const Objective& objective, Vector& theta, const TrainConfig& config,
                  const BatchObjective* batch_objective = nullptr, std::size_t pool_size = 0,
                  const Matrix* hessian = nullptr);

struct NtkDrift {
  double u = 0.0;   // ||Theta[u]_k - Theta[u]_0||_F / ||Theta[u]_0||_F
  double lu = 0.0;  // same for the operator-composed kernel
};

// Tangent kernels Theta = Phi^T Phi on the probe points.
NtkDrift ntk_drift(const Model& model, std::span<const double> theta0, std::span<const double> theta_k,
                   const std::vector<Point>& probes, const OperatorLinearization& op);

}  // namespace piml

#endif  // PIML_OPTIMIZERS_HPP_
