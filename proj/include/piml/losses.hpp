#ifndef PIML_LOSSES_HPP_
#define PIML_LOSSES_HPP_

#include <functional>
#include <optional>

#include "piml/model.hpp"
#include "piml/problems.hpp"
#include "piml/quadrature.hpp"

namespace piml {

enum class LossForm { strong, weak_kruzkhov, ritz };
std::string to_string(LossForm form);
LossForm loss_form_from_string(const std::string& s);

struct LossWeights {
  double s = 1.0;    // lambda_s, spatial boundary
  double t = 1.0;    // lambda_t, initial condition
  double d = 1.0;    // lambda_d, data term
  double reg = 0.0;  // lambda_r for the optional L2 parameter penalty
};

// Per-term breakdown; `total` is the weighted sum.
struct LossTerms {
  double total = 0.0;
  double interior = 0.0;
  double spatial = 0.0;
  double temporal = 0.0;
  double data = 0.0;
  double reg = 0.0;
};

// Strong-form discretized loss
//   J = sum_int w r_PDE^2 + l_s sum_s w r_s^2 + l_t sum_t w r_t^2 + l_d sum_d w r_d^2 (+ l_r |theta|^2)
// with quadrature weights w (so the interior sum approximates the integral).
// The per-term fields hold the unweighted sums. When grad is non-null it is
// overwritten with the gradient in theta.
LossTerms strong_loss(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                      const TrainingSet& set, const LossWeights& weights, Vector* grad = nullptr);

// I[w] = 1/2 int w_x^2 + 1/2 (int w)^2 - int f w by quadrature
// (poisson_neumann only).
double ritz_loss(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                 const QuadratureRule& quad, Vector* grad = nullptr);

// theta -> loss terms and (optionally) the gradient.
using Objective = std::function<LossTerms(std::span<const double>, Vector*)>;

Objective make_strong_objective(const PdeProblem& problem, ModelPtr model, TrainingSet set, LossWeights weights);
Objective make_ritz_objective(const PdeProblem& problem, ModelPtr model, QuadratureRule quad);

struct ErrorReport {
  std::optional<double> total;   // E = ||u - u_theta|| (L2, or L1 when requested)
  double training = 0.0;         // E_T = sqrt(J) on the training set
  double generalization = 0.0;   // E_G = sqrt(J) on the refined rule
  double gap = 0.0;              // |E_T^2 - E_G^2|
  LossTerms train_terms, fine_terms;
};

// `fine` must be at least 4x finer per axis than `set` (see
// refine_training_set). total uses the interior of `fine` as quadrature.
ErrorReport error_report(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                         const TrainingSet& set, const TrainingSet& fine, const LossWeights& weights,
                         bool l1 = false);

// ||u - u_theta||_{L^p} over `rule` (p = 1 or 2), and the same norm of u.
double solution_error(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                      const QuadratureRule& rule, int p = 2);
double solution_norm(const PdeProblem& problem, const QuadratureRule& rule, int p = 2);

struct GeneralizationBound {
  double value = 0.0;
  bool sample_condition_met = true;  // N >= 2 c^2 e^8 / (2 R L)^{n/2}
};

// sqrt(2 c^2 (n + 1) / N * ln(R L sqrt(N))).
GeneralizationBound generalization_bound(double c, double n, double big_n, double r_lip);

}  // namespace piml

#endif  // PIML_LOSSES_HPP_
