#ifndef PIML_WPINN_HPP_
#define PIML_WPINN_HPP_

#include <cstdint>

#include "piml/losses.hpp"
#include "piml/mlp_model.hpp"
#include "piml/optimizers.hpp"

namespace piml {

// R(v, phi, c) = - sum_j w_j (|v - c| phi_t + Q(v, c) phi_x) at the rule
// points. Gradients (when non-null) are overwritten.
double kruzkhov_residual(const PdeProblem& problem, const Model& v_model, std::span<const double> theta_v,
                         const Model& phi_model, std::span<const double> theta_phi, double c,
                         const QuadratureRule& quad, Vector* grad_v = nullptr, Vector* grad_phi = nullptr);

// Test-function family: a tanh MLP in (x, t) multiplied by the bump
// sin(pi (x - a) / (b - a)) sin(pi t / T), which vanishes on the whole
// boundary of D x [0, T].
ModelPtr make_adversary(const PdeProblem& problem, const std::vector<int>& hidden);

struct WpinnTerms {
  double residual = 0.0;  // max over the c grid of R / ||grad phi||
  double c_star = 0.0;
  double initial = 0.0;   // sum w |u(x,0) - u0(x)|
  double boundary = 0.0;  // sum w |u(x_b,t) - g(x_b,t)| over both ends
  double total = 0.0;
};

// wPINN training error: max_c normalized Kruzkhov residual plus lambda_t and
// lambda_s weighted L1 initial and boundary terms. `normalize` divides the
// residual by the quadrature L2 norm of grad phi.
WpinnTerms wpinn_loss(const PdeProblem& problem, const Model& v_model, std::span<const double> theta_v,
                      const Model& phi_model, std::span<const double> theta_phi, const std::vector<double>& c_grid,
                      const TrainingSet& set, double lambda_s, double lambda_t, bool normalize = true,
                      Vector* grad_v = nullptr, Vector* grad_phi = nullptr);

struct WpinnConfig {
  std::vector<int> u_hidden{20, 20};
  std::vector<int> adversary_hidden{24, 24};
  int n_int = 2048;
  int n_s = 128;
  int n_t = 256;
  RuleKind kind = RuleKind::monte_carlo;
  long outer_steps = 3000;
  int ascent_steps = 8;
  long reinit_every = 200;
  double lr_u = 1e-3;
  double lr_phi = 1e-2;
  double lambda_s = 10.0;
  double lambda_t = 10.0;
  int c_count = 17;
  bool normalize = true;
  std::uint64_t seed = 0;
  long log_every = 10;
};

struct WpinnHistory {
  long step = 0;
  WpinnTerms terms;
};

struct WpinnResult {
  std::shared_ptr<const MlpModel> model;
  Vector theta;
  std::vector<WpinnHistory> history;
  double rel_l1 = 0.0;  // relative space-time L1 error against the exact solution
  double wall_seconds = 0.0;
};

WpinnResult train_wpinn(const PdeProblem& problem, const WpinnConfig& config);

// sum |u_theta - u| / sum |u| on an m x m midpoint grid of D x [0, T].
double relative_l1_error(const PdeProblem& problem, const Model& model, std::span<const double> theta, int m = 128);

}  // namespace piml

#endif  // PIML_WPINN_HPP_
