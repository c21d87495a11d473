#include "piml/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "piml/errors.hpp"
#include "piml/wrappers.hpp"

namespace piml {

using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// G(i, j) = sum_k w_k F(i, k) F(j, k), accumulated into g with factor s.
void add_weighted_gram(Matrix& g, const Matrix& f, std::span<const double> w, double s = 1.0) {
  const std::size_t n = f.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = f.row(i);
    for (std::size_t j = i; j < n; ++j) {
      const auto fj = f.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * fi[k] * fj[k];
      g(i, j) += s * acc;
      if (j != i) g(j, i) += s * acc;
    }
  }
}

void add_weighted_rhs(Vector& c, const Matrix& f, std::span<const double> w, std::span<const double> r) {
  for (std::size_t i = 0; i < f.rows(); ++i) {
    const auto fi = f.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * r[k] * fi[k];
    c[i] += acc;
  }
}

double boundary_target(const PdeProblem& problem, const Point& p, bool temporal) {
  if (temporal) return problem.has_exact() ? problem.exact_value(p) : problem.initial_value(p.x);
  return problem.boundary_value(p);
}

bool uses_spatial_boundary(const PdeProblem& problem) {
  const auto& d = problem.domain();
  if (problem.kind() == ProblemKind::poisson_neumann) return false;
  return !(d.periodic_x && d.time_dependent());
}

double kappa_of(const GramParts& parts, double lambda) {
  return condition_number(combine(parts, lambda).a).kappa;
}

}  // namespace

TrainingSet fine_gram_rules(const PdeProblem& problem) {
  const auto& d = problem.domain();
  TrainingSetSpec spec;
  spec.kind = RuleKind::midpoint;
  if (d.time_dependent()) {
    spec.n_int = 128 * 128;
    spec.n_s = 256;
    spec.n_t = 128;
  } else {
    spec.n_int = 1 << 12;
  }
  return make_training_set(d, spec);
}

GramParts assemble_gram_parts(const PdeProblem& problem, const Model& model, std::span<const double> theta0,
                              const TrainingSet& rules) {
  problem.check_model(model);
  const std::size_t n = model.num_params();
  GramParts parts;
  parts.interior = Matrix(n, n);
  parts.boundary = Matrix(n, n);
  parts.c_int.assign(n, 0.0);
  parts.c_bnd.assign(n, 0.0);
  parts.quadrature = to_string(rules.interior.kind) + ":" + std::to_string(rules.interior.size());

  const OperatorLinearization op = problem.linearization();
  const TangentFeatures fi = parameter_jacobian(model, theta0, rules.interior.points, &op);
  add_weighted_gram(parts.interior, fi.l_phi, rules.interior.weights);
  Vector r(rules.interior.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Point& p = rules.interior.points[k];
    r[k] = problem.source(p) - problem.apply_operator(p, model.forward(theta0, p));
  }
  add_weighted_rhs(parts.c_int, fi.l_phi, rules.interior.weights, r);

  auto add_boundary = [&](const QuadratureRule& rule, bool temporal) {
    if (rule.empty()) return;
    const Matrix phi = component_jacobian(model, theta0, rule.points, Deriv::v);
    add_weighted_gram(parts.boundary, phi, rule.weights);
    Vector g(rule.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      g[k] = boundary_target(problem, rule.points[k], temporal) - model.forward(theta0, rule.points[k]).v();
    add_weighted_rhs(parts.c_bnd, phi, rule.weights, g);
  };
  if (uses_spatial_boundary(problem)) add_boundary(rules.spatial_boundary, false);
  if (problem.domain().time_dependent()) add_boundary(rules.temporal_boundary, true);
  return parts;
}

GramSystem combine(const GramParts& parts, double lambda) {
  GramSystem s;
  s.a = parts.interior + parts.boundary.scaled(lambda);
  s.c = axpy(lambda, parts.c_bnd, parts.c_int);
  s.lambda = lambda;
  s.quadrature = parts.quadrature;
  return s;
}

GramSystem assemble_gram(const PdeProblem& problem, const Model& model, std::span<const double> theta0,
                         double lambda) {
  return combine(assemble_gram_parts(problem, model, theta0, fine_gram_rules(problem)), lambda);
}

Matrix loss_hessian(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                    const TrainingSet& set, const LossWeights& weights) {
  problem.check_model(model);
  const std::size_t n = model.num_params();
  Matrix h(n, n);
  const OperatorLinearization op = problem.linearization();
  const TangentFeatures fi = parameter_jacobian(model, theta, set.interior.points, &op);
  add_weighted_gram(h, fi.l_phi, set.interior.weights, 2.0);

  const auto& d = problem.domain();
  if (problem.kind() != ProblemKind::poisson_neumann && !set.spatial_boundary.empty()) {
    if (d.periodic_x && d.time_dependent()) {
      std::vector<Point> hi, lo;
      for (const auto& p : set.spatial_boundary.points) {
        hi.push_back({d.x_hi, p.t});
        lo.push_back({d.x_lo, p.t});
      }
      const Matrix diff = component_jacobian(model, theta, hi, Deriv::v) - component_jacobian(model, theta, lo, Deriv::v);
      add_weighted_gram(h, diff, set.spatial_boundary.weights, 2.0 * weights.s);
    } else {
      add_weighted_gram(h, component_jacobian(model, theta, set.spatial_boundary.points, Deriv::v),
                        set.spatial_boundary.weights, 2.0 * weights.s);
    }
  }
  if (d.time_dependent() && !set.temporal_boundary.empty())
    add_weighted_gram(h, component_jacobian(model, theta, set.temporal_boundary.points, Deriv::v),
                      set.temporal_boundary.weights, 2.0 * weights.t);
  if (set.data_set)
    add_weighted_gram(h, component_jacobian(model, theta, set.data_set->points, Deriv::v), set.data_set->weights,
                      2.0 * weights.d);
  for (std::size_t i = 0; i < n; ++i) h(i, i) += 2.0 * weights.reg;
  return h;
}

bool SpectralReport::singular() const { return !std::isfinite(kappa); }

SpectralReport condition_number(const Matrix& a, double tau0) {
  if (!a.square()) throw ContractViolation("condition number needs a square matrix");
  if (a.asymmetry() > 1e-10 * std::max(a.max_abs(), 1e-300))
    throw ContractViolation("condition number needs a symmetric matrix");
  SpectralReport r;
  r.tau0 = tau0;
  const EigenDecomposition e = jacobi_eigen(a);
  r.eigenvalues = e.values;
  r.sweeps = e.sweeps;
  r.lambda_min = kInf;
  for (double v : e.values) {
    r.lambda_max = std::max(r.lambda_max, std::abs(v));
    r.lambda_min = std::min(r.lambda_min, std::abs(v));
  }
  if (e.values.empty()) r.lambda_min = 0.0;
  for (double v : e.values)
    if (std::abs(v) < tau0 * r.lambda_max) ++r.near_zero_count;
  if (r.lambda_max == 0.0 || r.lambda_min < 1e-14 * r.lambda_max)
    r.kappa = kInf;
  else
    r.kappa = r.lambda_max / r.lambda_min;
  return r;
}

SimplifiedGdResult simplified_gd(const GramSystem& sys, std::span<const double> theta0, double eta, long steps) {
  const std::size_t n = sys.a.rows();
  if (theta0.size() != n || sys.c.size() != n) throw ContractViolation("simplified GD: size mismatch");
  SimplifiedGdResult res;
  const Vector a_theta0 = sys.a * theta0;
  const Vector drive = axpy(1.0, sys.c, a_theta0);  // A theta0 + C

  std::optional<Vector> shift = cholesky_solve(sys.a, sys.c);
  if (!shift) shift = lu_solve(sys.a, sys.c);
  if (shift) res.fixed_point = axpy(1.0, *shift, theta0);

  const SpectralReport spec = condition_number(sys.a);
  const double c = eta * spec.lambda_max;
  const double rate = std::isfinite(spec.kappa) ? 1.0 - c / spec.kappa : 1.0;
  const double d0 = res.fixed_point ? norm2(subtract(theta0, *res.fixed_point)) : kInf;

  Vector th(theta0.begin(), theta0.end());
  res.trajectory.push_back(th);
  for (long k = 0; k <= steps; ++k) {
    if (k > 0) {
      const Vector ath = sys.a * th;
      for (std::size_t i = 0; i < n; ++i) th[i] += eta * (drive[i] - ath[i]);
      res.trajectory.push_back(th);
    }
    if (res.fixed_point) {
      const double err = norm2(subtract(th, *res.fixed_point));
      const double bound = std::pow(std::abs(rate), static_cast<double>(k)) * d0;
      res.errors.push_back(err);
      res.bounds.push_back(bound);
      if (err > bound * (1.0 + 1e-9) + 1e-12 * std::max(1.0, d0)) res.bound_holds = false;
    }
  }
  return res;
}

std::optional<long> steps_to_tolerance(double kappa, double c, double dist, double eps) {
  if (!std::isfinite(kappa)) return std::nullopt;
  if (!(c > 0.0) || c > kappa) throw DomainError("steps to tolerance needs 0 < c <= kappa");
  if (!(eps > 0.0) || !(dist > 0.0)) throw DomainError("steps to tolerance needs positive eps and distance");
  if (eps >= dist) return 0L;
  const double rate = 1.0 - c / kappa;
  if (rate <= 0.0) return 1L;
  return static_cast<long>(std::ceil(std::log(eps / dist) / std::log(rate)));
}

GramSystem precondition(const GramSystem& sys, const Matrix& p) {
  GramSystem out;
  const Matrix pt = p.transpose();
  out.a = pt * sys.a * p;
  out.c = pt * sys.c;
  out.lambda = sys.lambda;
  out.quadrature = sys.quadrature;
  return out;
}

GramParts precondition(const GramParts& parts, const Matrix& p) {
  GramParts out;
  const Matrix pt = p.transpose();
  out.interior = pt * parts.interior * p;
  out.boundary = pt * parts.boundary * p;
  out.c_int = pt * parts.c_int;
  out.c_bnd = pt * parts.c_bnd;
  out.quadrature = parts.quadrature;
  return out;
}

Matrix fourier_inverse_k2(const FourierFeatureModel& model, double gamma) {
  Vector d(model.num_params());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int k = model.spatial_index(i);
    d[i] = k == 0 ? gamma : 1.0 / (static_cast<double>(k) * k);
  }
  return Matrix::diagonal(d);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw ConfigError("log grid needs 0 < lo < hi and at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  return g;
}

LambdaSearchResult lambda_search(const GramParts& parts, const std::vector<double>& grid, bool refine) {
  if (grid.empty()) throw ConfigError("empty lambda grid");
  LambdaSearchResult res;
  std::size_t best = 0;
  double best_k = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = kappa_of(parts, grid[i]);
    res.curve.push_back({grid[i], k});
    if (k < best_k) {
      best_k = k;
      best = i;
    }
  }
  res.lambda_star = grid[best];
  res.kappa_star = best_k;
  if (!std::isfinite(best_k)) {
    res.all_infinite = true;
    res.unimodal = false;
    return res;
  }

  // Finite part of the curve must fall, then rise (ties within 1e-9 allowed).
  int turns = 0;
  int dir = 0;
  double prev = kInf;
  for (const auto& pt : res.curve) {
    if (!std::isfinite(pt.kappa)) continue;
    if (std::isfinite(prev)) {
      const double tol = 1e-9 * std::max(prev, pt.kappa);
      const int d = pt.kappa > prev + tol ? 1 : (pt.kappa < prev - tol ? -1 : 0);
      if (d != 0 && d != dir) {
        if (dir != 0) ++turns;
        dir = d;
      }
    }
    prev = pt.kappa;
  }
  res.unimodal = turns <= 1;

  if (refine && grid.size() >= 2) {
    double a = std::log(grid[best == 0 ? 0 : best - 1]);
    double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = kappa_of(parts, std::exp(x1)), f2 = kappa_of(parts, std::exp(x2));
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = kappa_of(parts, std::exp(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = kappa_of(parts, std::exp(x2));
      }
    }
    const double xm = 0.5 * (a + b);
    const double fm = kappa_of(parts, std::exp(xm));
    if (fm < res.kappa_star) {
      res.kappa_star = fm;
      res.lambda_star = std::exp(xm);
    }
  }
  return res;
}

std::optional<double> lambda_annealing(std::span<const double> grad_r, std::span<const double> grad_b) {
  if (grad_r.empty() || grad_b.empty()) return std::nullopt;
  double mx = 0.0;
  for (double g : grad_r) mx = std::max(mx, std::abs(g));
  double mean = 0.0;
  for (double g : grad_b) mean += std::abs(g);
  mean /= static_cast<double>(grad_b.size());
  if (mean == 0.0) return std::nullopt;
  return mx / mean;
}

std::optional<double> lambda_ntk(const GramParts& parts) {
  double ti = 0.0, tb = 0.0;
  for (std::size_t i = 0; i < parts.interior.rows(); ++i) {
    ti += parts.interior(i, i);
    tb += parts.boundary(i, i);
  }
  if (tb == 0.0) return std::nullopt;
  return ti / tb;
}

HardBcSurvey hard_bc_condition_survey() {
  HardBcSurvey s;
  const PdeProblem problem = PdeProblem::poisson_interval(-pi, pi, 1.0);
  auto toy = std::make_shared<FourierFeatureModel>(FourierSpec{1, 0, false});
  const TrainingSet rules = fine_gram_rules(problem);
  const Vector zero3(3, 0.0);

  const GramParts soft = assemble_gram_parts(problem, *toy, zero3, rules);
  const LambdaSearchResult ls = lambda_search(soft, log_grid(1e-3, 1e3, 121));
  s.lambda_star = ls.lambda_star;
  s.kappa_soft = ls.kappa_star;
  s.a_soft = combine(soft, ls.lambda_star).a;
  // diag(pi, 0, pi) + lambda * sum over x = +-pi of (-1, 1, 0)(-1, 1, 0)^T.
  s.a_soft_analytic = Matrix(3, 3);
  const double l2 = 2.0 * ls.lambda_star;
  s.a_soft_analytic(0, 0) = pi + l2;
  s.a_soft_analytic(1, 1) = l2;
  s.a_soft_analytic(2, 2) = pi;
  s.a_soft_analytic(0, 1) = s.a_soft_analytic(1, 0) = -l2;

  const std::vector<Point> ends{{-pi, 0.0}, {pi, 0.0}};
  const ModelPtr v1 = wrap_hard_bc_multiply(toy, sin_eta, ends, "sin(x)");
  s.a_variant1 = combine(assemble_gram_parts(problem, *v1, zero3, rules), 1.0).a;
  s.kappa_variant1 = condition_number(s.a_variant1).kappa;

  std::vector<Point> probes;
  for (int i = 0; i < 64; ++i) probes.push_back({-pi + 2.0 * pi * (i + 0.5) / 64.0, 0.0});
  const ModelPtr v2 = wrap_hard_bc_subtract(toy, pi, probes);
  const Vector zero2(v2->num_params(), 0.0);
  s.a_variant2 = combine(assemble_gram_parts(problem, *v2, zero2, rules), 1.0).a;
  s.kappa_variant2 = condition_number(s.a_variant2).kappa;
  return s;
}

namespace {

GramParts advection_parts(const PdeProblem& problem, const Model& model, double t0, double t1) {
  const auto& d = problem.domain();
  TrainingSet rules;
  rules.interior = midpoint_rule(Box::rect(d.x_lo, d.x_hi, t0, t1), 128);
  rules.temporal_boundary = midpoint_rule(Box::interval(d.x_lo, d.x_hi), 128);
  for (auto& p : rules.temporal_boundary.points) p.t = t0;
  const Vector zero(model.num_params(), 0.0);
  return assemble_gram_parts(problem, model, zero, rules);
}

}  // namespace

double advection_kappa(double beta, int k_max, int kt_max, double t_end) {
  const PdeProblem problem = PdeProblem::advection1d(beta, t_end);
  const FourierFeatureModel model(FourierSpec{k_max, kt_max, false});
  return lambda_search(advection_parts(problem, model, 0.0, t_end), log_grid(1e-4, 1e4, 161)).kappa_star;
}

DomainSplitSurvey domain_split_survey(double beta, int windows, int k_max, int kt_max, double t_end) {
  if (windows < 1) throw ConfigError("need at least one time window");
  DomainSplitSurvey s;
  s.kappa_unsplit = advection_kappa(beta, k_max, kt_max, t_end);
  const PdeProblem problem = PdeProblem::advection1d(beta, t_end);
  auto inner = std::make_shared<FourierFeatureModel>(FourierSpec{k_max, kt_max, false});
  const double dt = t_end / windows;
  for (int w = 0; w < windows; ++w) {
    const double t0 = w * dt;
    const TimeAffineWrapper local(inner, t0, t_end / dt);
    const LambdaSearchResult r =
        lambda_search(advection_parts(problem, local, t0, t0 + dt), log_grid(1e-4, 1e4, 161));
    s.kappa_windows.push_back(r.kappa_star);
    s.lambda_windows.push_back(r.lambda_star);
  }
  return s;
}

}  // namespace piml
