#ifndef PIML_PROBLEMS_HPP_
#define PIML_PROBLEMS_HPP_

#include <functional>
#include <string>

#include "piml/model.hpp"
#include "piml/quadrature.hpp"

namespace piml {

enum class ProblemKind { poisson1d, poisson_neumann, heat1d, advection1d, scl };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

// Concrete 1D problems. Operator conventions:
//   poisson1d        L u = u_xx                  f = -w^2 sin(w x), exact sin(w x)
//   poisson_neumann  L u = -u_xx (+ mean term)   f = cos(pi x) on [0,1], exact cos(pi x)/pi^2
//   heat1d           L u = u_t - u_xx            u0 = sin(pi x), exact exp(-pi^2 t) sin(pi x)
//   advection1d      L u = u_t + beta u_x        periodic on [0, 2 pi], u0 = sin x
//   scl (Burgers)    L u = u_t + (u^2/2)_x - nu u_xx, Riemann data (u_l, u_r) at x0
class PdeProblem {
 public:
  static PdeProblem poisson1d(double omega = 1.0);
  // Poisson on [a, b] with Dirichlet data from sin(omega x).
  static PdeProblem poisson_interval(double a, double b, double omega);
  static PdeProblem poisson_neumann();
  static PdeProblem heat1d(double t_end = 1.0);
  static PdeProblem advection1d(double beta, double t_end = 1.0);
  static PdeProblem burgers(double nu, double t_end = 0.5, double x0 = 0.25);

  ProblemKind kind() const { return kind_; }
  std::string name() const;
  std::string describe() const;
  const SpaceTimeDomain& domain() const { return domain_; }
  double beta() const { return beta_; }
  double nu() const { return nu_; }
  double x0() const { return x0_; }
  double u_left() const { return u_left_; }
  double u_right() const { return u_right_; }
  // Highest derivative order the operator needs.
  int required_order() const;

  double source(const Point& p) const;
  double boundary_value(const Point& p) const;
  double initial_value(double x) const;
  bool has_exact() const;
  // Exact solution jet (value and the derivatives available in closed form).
  // Throws CapabilityError when no exact solution is known.
  Jet exact(const Point& p) const;
  double exact_value(const Point& p) const { return exact(p).v(); }

  // L u at p from the model jet; throws CapabilityError when the model cannot
  // supply the needed derivative order.
  double apply_operator(const Point& p, const Jet& u) const;
  // d(L u)/d(jet) at p.
  Jet operator_linearization(const Point& p, const Jet& u) const;
  OperatorLinearization linearization() const;
  void check_model(const Model& model) const;

  // Flux data (scl only; Burgers f(u) = u^2/2).
  double flux(double u) const { return 0.5 * u * u; }
  double flux_prime(double u) const { return u; }
  double flux_second(double) const { return 1.0; }

  // Measure of the spatial boundary, |dD| (two endpoints in 1D).
  double boundary_measure() const { return domain_.periodic_x ? 1.0 : 2.0; }

 private:
  ProblemKind kind_ = ProblemKind::poisson1d;
  SpaceTimeDomain domain_;
  double omega_ = 1.0;
  double beta_ = 0.0;
  double nu_ = 0.0;
  double x0_ = 0.25;
  double u_left_ = 1.0, u_right_ = 0.0;
};

// Kruzkhov entropy data for scalar conservation laws.
struct EntropyData {
  double c_lo = 0.0, c_hi = 1.0;  // essential range
  std::vector<double> c_grid;

  // Q(u, c) = sgn(u - c) (f(u) - f(c)).
  static double flux_q(const PdeProblem& problem, double u, double c);
  // Range [min u0, max u0] sampled on a fine grid, with `count` equispaced c.
  static EntropyData for_problem(const PdeProblem& problem, int count = 17);
};

struct HeatResidualNorms {
  double pde_sq = 0.0;   // ||R_PDE||^2
  double t_sq = 0.0;     // ||R_t||^2
  double s = 0.0;        // ||R_s|| (not squared)
};

// C1 = sqrt(T + (1 + 2 C_f) T^2 exp((1 + 2 C_f) T)).
double heat_constant_c1(double t_end, double c_f);
// C2 = sqrt(T^{1/2} |dD|^{1/2} (||u||_C1 + ||v||_C1)).
double heat_constant_c2(double t_end, double boundary_measure, double c1_norm_u, double c1_norm_v);
// C1 [ pde_sq + t_sq + C2 s ]. Throws DomainError for negative inputs.
double heat_stability_rhs(double t_end, double c_f, const HeatResidualNorms& r, double c2);

struct SclNorms {
  double u_inf = 0.0;        // ||u||_inf
  double u_theta_inf = 0.0;  // ||u_theta||_inf
  double u_x_inf = 0.0;      // ||u_x||_inf
  double u_theta_x_inf = 0.0;
};

struct SclResidualNorms {
  double pde_sq = 0.0;
  double t_sq = 0.0;
  double s = 0.0;  // ||R_s|| (the bound uses both s^2 and s)
};

struct SclBound {
  double value = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  bool c3_heuristic = true;
};

// (T + C1 T^2 e^{C1 T}) [pde_sq + t_sq + 2 C2 s^2 + 2 nu sqrt(T) C3 s].
// C3 defaults to ||f'||_inf (1 + ||u_theta||_C0) unless c3 is supplied.
// nu <= 0 raises DomainError: the constants blow up as nu -> 0.
SclBound scl_stability_rhs(const PdeProblem& problem, const SclNorms& norms, const SclResidualNorms& r,
                           std::function<double(const PdeProblem&, const SclNorms&)> c3 = nullptr);

// Poincare constant of [0, 1] and the Ritz upper bound
// ||w - u~||_{H1}^2 <= 2 max(2 C_P + 1, 2) (I[w] - I[u~]).
double poincare_constant_unit_interval();
double ritz_h1_bound(double energy_gap);

}  // namespace piml

#endif  // PIML_PROBLEMS_HPP_
