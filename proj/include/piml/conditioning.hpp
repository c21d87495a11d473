#ifndef PIML_CONDITIONING_HPP_
#define PIML_CONDITIONING_HPP_

#include <optional>
#include <string>

#include "piml/fourier_model.hpp"
#include "piml/losses.hpp"
#include "piml/model.hpp"
#include "piml/problems.hpp"

namespace piml {

// Interior and boundary halves of the Gram system, kept apart so that the
// boundary weight lambda can be swept without reassembly:
//   A(lambda) = interior + lambda * boundary,  C(lambda) = c_int + lambda * c_bnd.
struct GramParts {
  Matrix interior;  // sum_int w L phi_i L phi_j
  Matrix boundary;  // sum_bnd w phi_i phi_j
  Vector c_int;     // sum_int w (f - L u0) L phi_i
  Vector c_bnd;     // sum_bnd w (g - u0) phi_i
  std::string quadrature;
};

struct GramSystem {
  Matrix a;
  Vector c;
  double lambda = 0.0;
  std::string quadrature;
};

// Rules standing in for the continuous inner products: 2^12 midpoint cells in
// 1D, 128 per axis in space-time, 128 cells for the initial line, endpoint
// atoms for 1D spatial boundaries.
TrainingSet fine_gram_rules(const PdeProblem& problem);

// Assembles the Gram parts at theta0 over the rules of `rules`. The boundary
// part collects the spatial boundary (Dirichlet data; skipped for periodic
// space-time problems where periodicity is built into the basis) and the
// initial line (initial data).
GramParts assemble_gram_parts(const PdeProblem& problem, const Model& model, std::span<const double> theta0,
                              const TrainingSet& rules);

GramSystem combine(const GramParts& parts, double lambda);

// Hessian of strong_loss in theta for a linear model (Gauss-Newton matrix
// 2 J^T W J otherwise). With lambda_s = lambda_t = lambda and no data term it
// equals 2 combine(assemble_gram_parts(.., set), lambda).a.
Matrix loss_hessian(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                    const TrainingSet& set, const LossWeights& weights);

// assemble_gram_parts on fine_gram_rules, combined at lambda.
GramSystem assemble_gram(const PdeProblem& problem, const Model& model, std::span<const double> theta0,
                         double lambda);

struct SpectralReport {
  Vector eigenvalues;  // ascending
  double lambda_min = 0.0;  // min |eigenvalue|
  double lambda_max = 0.0;  // max |eigenvalue|
  double kappa = 0.0;       // +inf when lambda_min < 1e-14 lambda_max
  std::size_t near_zero_count = 0;  // |eigenvalue| < tau0 * lambda_max
  double tau0 = 1e-8;
  int sweeps = 0;
  bool singular() const;
};

SpectralReport condition_number(const Matrix& a, double tau0 = 1e-8);

struct SimplifiedGdResult {
  std::vector<Vector> trajectory;        // theta~_0 .. theta~_steps
  std::optional<Vector> fixed_point;     // theta0 + A^{-1} C
  Vector errors;                         // ||theta~_k - fixed point||
  Vector bounds;                         // (1 - c / kappa)^k ||theta0 - fixed point||
  bool bound_holds = true;
};

// theta~_{k+1} = (I - eta A) theta~_k + eta (A theta0 + C), started at theta0.
// The contraction bound uses c = eta * lambda_max.
SimplifiedGdResult simplified_gd(const GramSystem& sys, std::span<const double> theta0, double eta, long steps);

// ceil(ln(eps / dist) / ln(1 - c / kappa)); nullopt for kappa = inf.
std::optional<long> steps_to_tolerance(double kappa, double c, double dist, double eps);

// A~ = P^T A P, C~ = P^T C.
GramSystem precondition(const GramSystem& sys, const Matrix& p);
GramParts precondition(const GramParts& parts, const Matrix& p);

// Diagonal P with P_kk = 1/k^2 on spatial frequency k and P_00 = gamma.
Matrix fourier_inverse_k2(const FourierFeatureModel& model, double gamma);

struct LambdaCurvePoint {
  double lambda = 0.0;
  double kappa = 0.0;
};

struct LambdaSearchResult {
  double lambda_star = 0.0;
  double kappa_star = 0.0;
  std::vector<LambdaCurvePoint> curve;
  bool unimodal = true;
  bool all_infinite = false;
};

// Minimizes kappa(A(lambda)) over a log-spaced grid, then refines by golden
// section in log(lambda) between the grid neighbours of the best point.
LambdaSearchResult lambda_search(const GramParts& parts, const std::vector<double>& grid, bool refine = true);
std::vector<double> log_grid(double lo, double hi, int count);

// max_k |grad R|_k / mean_k |grad B|_k; nullopt when the denominator is 0.
std::optional<double> lambda_annealing(std::span<const double> grad_r, std::span<const double> grad_b);

// trace(interior) / trace(boundary); nullopt for a zero boundary trace.
std::optional<double> lambda_ntk(const GramParts& parts);

struct HardBcSurvey {
  double kappa_soft = 0.0;
  double lambda_star = 0.0;
  double kappa_variant1 = 0.0;
  double kappa_variant2 = 0.0;
  Matrix a_soft, a_variant1, a_variant2;
  Matrix a_soft_analytic;  // closed-form soft matrix at lambda_star
};

// Toy model u = t_{-1} cos x + t_0 + t_1 sin x for u_xx = f on (-pi, pi)
// with Dirichlet atoms at +-pi.
HardBcSurvey hard_bc_condition_survey();

struct DomainSplitSurvey {
  double kappa_unsplit = 0.0;
  std::vector<double> kappa_windows;
  std::vector<double> lambda_windows;
};

// Advection with speed beta on [0, 2 pi] x [0, T], split into `windows` equal
// time windows, each carrying its own Fourier model in local time
// s = windows * (t - t_k). The initial line of each window is its supervised
// boundary term; kappa is lambda-optimized per window.
DomainSplitSurvey domain_split_survey(double beta, int windows, int k_max = 4, int kt_max = 2, double t_end = 1.0);

// kappa*(beta) for the unsplit advection problem.
double advection_kappa(double beta, int k_max = 4, int kt_max = 2, double t_end = 1.0);

}  // namespace piml

#endif  // PIML_CONDITIONING_HPP_
