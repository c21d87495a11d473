#include "piml/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "piml/errors.hpp"

namespace piml {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::gd: return "gd";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::minibatch: return "minibatch";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::newton_linear: return "newton_linear";
  }
  return "unknown";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "gd") return OptimizerKind::gd;
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "minibatch") return OptimizerKind::minibatch;
  if (s == "adam") return OptimizerKind::adam;
  if (s == "newton" || s == "newton_linear") return OptimizerKind::newton_linear;
  throw ConfigError("unknown optimizer '" + s + "'");
}

Vector gd_step(std::span<const double> theta, std::span<const double> grad, double eta, long epoch) {
  for (double g : grad)
    if (!std::isfinite(g)) throw DivergenceError("non-finite gradient", epoch);
  return axpy(-eta, grad, theta);
}

void adam_step(OptimizerState& s, Vector& theta, std::span<const double> grad) {
  const AdamParams& a = s.adam;
  if (s.m.size() != theta.size()) {
    s.m.assign(theta.size(), 0.0);
    s.v.assign(theta.size(), 0.0);
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) throw DivergenceError("non-finite gradient", s.step);
    s.m[i] = a.beta1 * s.m[i] + (1.0 - a.beta1) * g;
    s.v[i] = a.beta2 * s.v[i] + (1.0 - a.beta2) * g * g;
    const double mh = s.m[i] / c1;
    const double vh = s.v[i] / c2;
    const double denom = a.eps_inside_sqrt ? std::sqrt(vh + a.eps) : std::sqrt(vh) + a.eps;
    theta[i] -= a.alpha * mh / denom;
  }
}

NewtonResult newton_linear_step(std::span<const double> theta, const Matrix& hessian, std::span<const double> grad) {
  NewtonResult r;
  auto step = lu_solve(hessian, Vector(grad.begin(), grad.end()));
  if (!step) {
    Matrix h = hessian;
    const double ridge = 1e-10 * std::max(hessian.max_abs(), 1e-300);
    for (std::size_t i = 0; i < h.rows(); ++i) h(i, i) += ridge;
    step = lu_solve(h, Vector(grad.begin(), grad.end()));
    r.ridge_used = true;
    if (!step) throw DivergenceError("Hessian singular even after ridge", 0);
  }
  r.theta = subtract(theta, *step);
  return r;
}

std::vector<std::vector<std::size_t>> minibatch_partition(std::size_t n, std::size_t m, Rng& rng) {
  if (m < 1 || m > n) throw ConfigError("batch size must satisfy 1 <= m <= N");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Fisher-Yates with the run's own generator (std::shuffle is not portable
  // across standard libraries).
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += m)
    out.emplace_back(idx.begin() + start, idx.begin() + std::min(n, start + m));
  return out;
}

BatchObjective make_strong_batch_objective(const PdeProblem& problem, ModelPtr model, TrainingSet set,
                                           LossWeights weights) {
  return [problem, model = std::move(model), set = std::move(set), weights](
             std::span<const double> theta, Vector* grad, std::span<const std::size_t> subset) {
    TrainingSet sub = set;
    sub.interior = set.interior.subset(std::vector<std::size_t>(subset.begin(), subset.end()));
    const double scale = static_cast<double>(set.interior.size()) / static_cast<double>(subset.size());
    for (double& w : sub.interior.weights) w *= scale;
    return strong_loss(problem, *model, theta, sub, weights, grad);
  };
}

namespace {

double lr_at(const TrainConfig& c, long step) {
  if (c.schedule == Schedule::inv_sqrt) return c.lr / std::sqrt(static_cast<double>(std::max(1L, step)));
  return c.lr;
}

bool finite_terms(const LossTerms& t) { return std::isfinite(t.total); }

}  // namespace

TrainRecord train(const Objective& objective, Vector& theta, const TrainConfig& config,
                  const BatchObjective* batch_objective, std::size_t pool_size, const Matrix* hessian) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainRecord rec;
  rec.seed = config.seed;
  OptimizerState state;
  state.kind = config.kind;
  state.adam = config.adam;
  state.adam.alpha = config.lr;
  Rng rng = Rng(config.seed).substream("minibatch");

  std::size_t batch = config.batch;
  if (config.kind == OptimizerKind::sgd) batch = 1;
  const bool batched = batch > 0 && batch_objective != nullptr && pool_size > 0 && batch < pool_size;
  if ((config.kind == OptimizerKind::sgd || config.kind == OptimizerKind::minibatch) && !batched)
    batch = 0;  // degenerates to full-batch GD
  if (config.kind == OptimizerKind::newton_linear && hessian == nullptr)
    throw ConfigError("newton_linear needs the quadratic-loss Hessian (linear models only)");

  Vector grad;
  LossTerms terms = objective(theta, &grad);
  const double initial = terms.total;
  rec.epochs.push_back({0, terms});
  rec.snapshot_hashes.emplace_back(0, ParameterVector({LayoutBlock{"theta", theta.size(), 1}}, theta).hash());
  long step = 0;
  try {
    for (long epoch = 1; epoch <= config.epochs; ++epoch) {
      if (config.target_loss > 0.0 && terms.total <= config.target_loss) break;
      if (batched) {
        for (const auto& part : minibatch_partition(pool_size, batch, rng)) {
          Vector g;
          (*batch_objective)(theta, &g, part);
          ++step;
          if (config.kind == OptimizerKind::adam)
            adam_step(state, theta, g);
          else
            theta = gd_step(theta, g, lr_at(config, step), epoch);
        }
      } else {
        ++step;
        switch (config.kind) {
          case OptimizerKind::adam: adam_step(state, theta, grad); break;
          case OptimizerKind::newton_linear: {
            NewtonResult nr = newton_linear_step(theta, *hessian, grad);
            rec.ridge_used = rec.ridge_used || nr.ridge_used;
            theta = std::move(nr.theta);
            break;
          }
          default: theta = gd_step(theta, grad, lr_at(config, step), epoch); break;
        }
      }
      terms = objective(theta, &grad);
      rec.epochs.push_back({epoch, terms});
      if (!finite_terms(terms)) throw DivergenceError("loss became non-finite", epoch);
      if (terms.total > config.divergence_factor * std::max(initial, 1e-300))
        throw DivergenceError("loss exceeded divergence threshold", epoch);
      if (config.snapshot_every > 0 && epoch % config.snapshot_every == 0)
        rec.snapshot_hashes.emplace_back(epoch,
                                         ParameterVector({LayoutBlock{"theta", theta.size(), 1}}, theta).hash());
    }
  } catch (const DivergenceError& e) {
    rec.diverged = true;
    rec.message = e.what();
  }
  rec.final_terms = rec.epochs.back().terms;
  rec.snapshot_hashes.emplace_back(rec.epochs.back().epoch,
                                   ParameterVector({LayoutBlock{"theta", theta.size(), 1}}, theta).hash());
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

Matrix kernel(const Matrix& phi) { return phi.transpose() * phi; }

double rel_frobenius(const Matrix& a, const Matrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += d * d;
    den += b.data()[i] * b.data()[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

NtkDrift ntk_drift(const Model& model, std::span<const double> theta0, std::span<const double> theta_k,
                   const std::vector<Point>& probes, const OperatorLinearization& op) {
  const TangentFeatures f0 = parameter_jacobian(model, theta0, probes, &op);
  const TangentFeatures fk = parameter_jacobian(model, theta_k, probes, &op);
  NtkDrift d;
  d.u = rel_frobenius(kernel(fk.phi), kernel(f0.phi));
  d.lu = rel_frobenius(kernel(fk.l_phi), kernel(f0.l_phi));
  return d;
}

}  // namespace piml
