#include "piml/losses.hpp"

#include <cmath>

#include "piml/errors.hpp"

namespace piml {

std::string to_string(LossForm form) {
  switch (form) {
    case LossForm::strong: return "strong";
    case LossForm::weak_kruzkhov: return "weak_kruzkhov";
    case LossForm::ritz: return "ritz";
  }
  return "unknown";
}

LossForm loss_form_from_string(const std::string& s) {
  if (s == "strong") return LossForm::strong;
  if (s == "weak_kruzkhov" || s == "weak") return LossForm::weak_kruzkhov;
  if (s == "ritz") return LossForm::ritz;
  throw ConfigError("unknown loss form '" + s + "'");
}

namespace {

void check_finite(double r, const Point& p, const char* what) {
  if (!std::isfinite(r))
    throw EvaluationError(std::string("non-finite ") + what + " residual at (x=" + std::to_string(p.x) +
                          ", t=" + std::to_string(p.t) + ")");
}

// Accumulates lambda * sum w (u - target)^2 over a rule of plain value
// residuals.
double value_term(const Model& model, std::span<const double> theta, const QuadratureRule& rule,
                  const std::function<double(const Point&)>& target, double lambda, Vector* grad, const char* what) {
  double sum = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const Point& p = rule.points[j];
    const double r = model.forward(theta, p).v() - target(p);
    check_finite(r, p, what);
    if (grad != nullptr && lambda != 0.0) {
      Jet cot;
      cot.v() = 2.0 * lambda * rule.weights[j] * r;
      model.backward(theta, p, cot, *grad);
    }
    sum += rule.weights[j] * r * r;
  }
  return sum;
}

}  // namespace

LossTerms strong_loss(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                      const TrainingSet& set, const LossWeights& lw, Vector* grad) {
  problem.check_model(model);
  if (grad != nullptr) grad->assign(model.num_params(), 0.0);
  LossTerms terms;

  for (std::size_t j = 0; j < set.interior.size(); ++j) {
    const Point& p = set.interior.points[j];
    const double w = set.interior.weights[j];
    const Jet u = model.forward(theta, p);
    const double r = problem.apply_operator(p, u) - problem.source(p);
    check_finite(r, p, "PDE");
    terms.interior += w * r * r;
    if (grad != nullptr) {
      Jet cot = problem.operator_linearization(p, u);
      cot *= 2.0 * w * r;
      model.backward(theta, p, cot, *grad);
    }
  }

  const auto& dom = problem.domain();
  if (problem.kind() != ProblemKind::poisson_neumann && !set.spatial_boundary.empty()) {
    if (dom.periodic_x && dom.time_dependent()) {
      // Periodicity residual u(x_hi, t) - u(x_lo, t).
      for (std::size_t j = 0; j < set.spatial_boundary.size(); ++j) {
        const Point hi{dom.x_hi, set.spatial_boundary.points[j].t};
        const Point lo{dom.x_lo, hi.t};
        const double w = set.spatial_boundary.weights[j];
        const double r = model.forward(theta, hi).v() - model.forward(theta, lo).v();
        check_finite(r, hi, "periodicity");
        terms.spatial += w * r * r;
        if (grad != nullptr && lw.s != 0.0) {
          Jet cot;
          cot.v() = 2.0 * lw.s * w * r;
          model.backward(theta, hi, cot, *grad);
          cot.v() = -cot.v();
          model.backward(theta, lo, cot, *grad);
        }
      }
    } else {
      terms.spatial = value_term(model, theta, set.spatial_boundary,
                                 [&](const Point& p) { return problem.boundary_value(p); }, lw.s, grad, "boundary");
    }
  }
  if (dom.time_dependent() && !set.temporal_boundary.empty())
    terms.temporal = value_term(model, theta, set.temporal_boundary,
                                [&](const Point& p) { return problem.initial_value(p.x); }, lw.t, grad, "initial");
  if (set.data_set)
    terms.data = value_term(model, theta, *set.data_set, [&](const Point& p) { return problem.exact_value(p); }, lw.d,
                            grad, "data");
  if (lw.reg != 0.0) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      terms.reg += theta[i] * theta[i];
      if (grad != nullptr) (*grad)[i] += 2.0 * lw.reg * theta[i];
    }
  }
  terms.total = terms.interior + lw.s * terms.spatial + lw.t * terms.temporal + lw.d * terms.data + lw.reg * terms.reg;
  return terms;
}

double ritz_loss(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                 const QuadratureRule& quad, Vector* grad) {
  if (problem.kind() != ProblemKind::poisson_neumann)
    throw CapabilityError("Ritz energy is only defined for poisson_neumann");
  if (model.max_order() < 1) throw CapabilityError(model.name() + " lacks first derivatives");
  double grad_sq = 0.0, mean = 0.0, forcing = 0.0;
  std::vector<Jet> jets(quad.size());
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const Point& p = quad.points[j];
    const double w = quad.weights[j];
    jets[j] = model.forward(theta, p);
    check_finite(jets[j].v() + jets[j].x(), p, "Ritz");
    grad_sq += w * jets[j].x() * jets[j].x();
    mean += w * jets[j].v();
    forcing += w * problem.source(p) * jets[j].v();
  }
  if (grad != nullptr) {
    grad->assign(model.num_params(), 0.0);
    for (std::size_t j = 0; j < quad.size(); ++j) {
      const Point& p = quad.points[j];
      const double w = quad.weights[j];
      Jet cot;
      cot.x() = w * jets[j].x();
      cot.v() = w * (mean - problem.source(p));
      model.backward(theta, p, cot, *grad);
    }
  }
  return 0.5 * grad_sq + 0.5 * mean * mean - forcing;
}

Objective make_strong_objective(const PdeProblem& problem, ModelPtr model, TrainingSet set, LossWeights weights) {
  return [problem, model = std::move(model), set = std::move(set), weights](std::span<const double> theta,
                                                                           Vector* grad) {
    return strong_loss(problem, *model, theta, set, weights, grad);
  };
}

Objective make_ritz_objective(const PdeProblem& problem, ModelPtr model, QuadratureRule quad) {
  return [problem, model = std::move(model), quad = std::move(quad)](std::span<const double> theta, Vector* grad) {
    LossTerms t;
    t.interior = ritz_loss(problem, *model, theta, quad, grad);
    t.total = t.interior;
    return t;
  };
}

double solution_error(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                      const QuadratureRule& rule, int p) {
  double s = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double d = std::abs(model.forward(theta, rule.points[j]).v() - problem.exact_value(rule.points[j]));
    s += rule.weights[j] * (p == 1 ? d : d * d);
  }
  return p == 1 ? s : std::sqrt(s);
}

double solution_norm(const PdeProblem& problem, const QuadratureRule& rule, int p) {
  double s = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double d = std::abs(problem.exact_value(rule.points[j]));
    s += rule.weights[j] * (p == 1 ? d : d * d);
  }
  return p == 1 ? s : std::sqrt(s);
}

ErrorReport error_report(const PdeProblem& problem, const Model& model, std::span<const double> theta,
                         const TrainingSet& set, const TrainingSet& fine, const LossWeights& weights, bool l1) {
  ErrorReport rep;
  LossWeights w = weights;
  w.reg = 0.0;
  rep.train_terms = strong_loss(problem, model, theta, set, w);
  TrainingSet fine_no_data = fine;
  fine_no_data.data_set.reset();
  if (set.data_set) fine_no_data.data_set = set.data_set;
  rep.fine_terms = strong_loss(problem, model, theta, fine_no_data, w);
  rep.training = std::sqrt(rep.train_terms.total);
  rep.generalization = std::sqrt(rep.fine_terms.total);
  rep.gap = std::abs(rep.train_terms.total - rep.fine_terms.total);
  if (problem.has_exact()) rep.total = solution_error(problem, model, theta, fine.interior, l1 ? 1 : 2);
  return rep;
}

GeneralizationBound generalization_bound(double c, double n, double big_n, double r_lip) {
  if (!(c > 0.0) || !(n > 0.0) || !(big_n > 0.0) || !(r_lip > 0.0))
    throw DomainError("generalization bound needs positive c, n, N and R*L");
  GeneralizationBound b;
  const double log_term = std::log(r_lip * std::sqrt(big_n));
  if (log_term < 0.0) throw DomainError("ln(R L sqrt(N)) is negative; bound undefined");
  b.value = std::sqrt(2.0 * c * c * (n + 1.0) / big_n * log_term);
  b.sample_condition_met = big_n >= 2.0 * c * c * std::exp(8.0) / std::pow(2.0 * r_lip, n / 2.0);
  return b;
}

}  // namespace piml
