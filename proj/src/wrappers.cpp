#include "piml/wrappers.hpp"

#include <cmath>
#include <sstream>

#include "piml/errors.hpp"
#include "piml/format.hpp"
#include "piml/mlp_model.hpp"

namespace piml {

MultiplyWrapper::MultiplyWrapper(ModelPtr inner, JetFunction eta, const std::vector<Point>& boundary,
                                 std::string eta_name)
    : inner_(std::move(inner)), eta_(std::move(eta)), eta_name_(std::move(eta_name)) {
  for (const Point& p : boundary) {
    const double v = eta_(p).v();
    if (!(std::abs(v) <= 1e-12)) {
      std::ostringstream os;
      os << eta_name_ << " does not vanish on the boundary: value " << v << " at (x=" << p.x << ", t=" << p.t << ")";
      throw ContractViolation(os.str());
    }
  }
}

Jet MultiplyWrapper::forward(std::span<const double> theta, const Point& p) const {
  return jet_product(eta_(p), inner_->forward(theta, p));
}

Jet MultiplyWrapper::backward(std::span<const double> theta, const Point& p, const Jet& c,
                              std::span<double> grad) const {
  const Jet e = eta_(p);
  // Transpose of the linear map u-jet -> (eta * u)-jet.
  Jet ci;
  ci.v() = c.v() * e.v() + c.x() * e.x() + c.t() * e.t() + c.xx() * e.xx() + c.xt() * e.xt() + c.tt() * e.tt();
  ci.x() = c.x() * e.v() + 2.0 * c.xx() * e.x() + c.xt() * e.t();
  ci.t() = c.t() * e.v() + 2.0 * c.tt() * e.t() + c.xt() * e.x();
  ci.xx() = c.xx() * e.v();
  ci.xt() = c.xt() * e.v();
  ci.tt() = c.tt() * e.v();
  const Jet u = inner_->backward(theta, p, ci, grad);
  return jet_product(e, u);
}

std::string SubtractAtWrapper::describe() const {
  return inner_->describe() + " - u(" + format_double(x_b_) + ",t)";
}

namespace {

// Keeps the parts of a jet at (x_b, t) that survive as functions of (x, t).
Jet anchor_part(const Jet& j) {
  Jet r;
  r.v() = j.v();
  r.t() = j.t();
  r.tt() = j.tt();
  return r;
}

}  // namespace

Jet SubtractAtWrapper::forward(std::span<const double> theta, const Point& p) const {
  Jet u = inner_->forward(theta, p);
  u -= anchor_part(inner_->forward(theta, Point{x_b_, p.t}));
  return u;
}

Jet SubtractAtWrapper::backward(std::span<const double> theta, const Point& p, const Jet& cot,
                                std::span<double> grad) const {
  Jet u = inner_->backward(theta, p, cot, grad);
  Jet neg = anchor_part(cot);
  neg *= -1.0;
  u -= anchor_part(inner_->backward(theta, Point{x_b_, p.t}, neg, grad));
  return u;
}

RestrictWrapper::RestrictWrapper(ModelPtr inner, std::vector<std::size_t> kept, Vector frozen)
    : inner_(std::move(inner)), kept_(std::move(kept)), frozen_(std::move(frozen)) {
  if (frozen_.size() != inner_->num_params()) throw ContractViolation("frozen values must cover all parameters");
  for (std::size_t k : kept_)
    if (k >= frozen_.size()) throw ContractViolation("kept parameter index out of range");
}

ParameterLayout RestrictWrapper::layout() const { return {LayoutBlock{"theta", kept_.size(), 1}}; }

std::string RestrictWrapper::describe() const {
  std::ostringstream os;
  os << inner_->describe() << " restricted to " << kept_.size() << "/" << frozen_.size() << " parameters";
  return os.str();
}

Vector RestrictWrapper::expand(std::span<const double> theta) const {
  Vector full = frozen_;
  for (std::size_t i = 0; i < kept_.size(); ++i) full[kept_[i]] = theta[i];
  return full;
}

Jet RestrictWrapper::forward(std::span<const double> theta, const Point& p) const {
  return inner_->forward(expand(theta), p);
}

Jet RestrictWrapper::backward(std::span<const double> theta, const Point& p, const Jet& cot,
                              std::span<double> grad) const {
  Vector g(frozen_.size(), 0.0);
  const Jet u = inner_->backward(expand(theta), p, cot, g);
  for (std::size_t i = 0; i < kept_.size(); ++i) grad[i] += g[kept_[i]];
  return u;
}

ScaledParamsWrapper::ScaledParamsWrapper(ModelPtr inner, Vector alpha) : inner_(std::move(inner)), alpha_(std::move(alpha)) {
  if (alpha_.size() != inner_->num_params()) throw ContractViolation("one scale factor per parameter required");
  for (double a : alpha_)
    if (!std::isfinite(a)) throw ContractViolation("scale factors must be finite");
}

Vector ScaledParamsWrapper::to_inner(std::span<const double> theta) const {
  Vector out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = alpha_[i] * theta[i];
  return out;
}

Jet ScaledParamsWrapper::forward(std::span<const double> theta, const Point& p) const {
  return inner_->forward(to_inner(theta), p);
}

Jet ScaledParamsWrapper::backward(std::span<const double> theta, const Point& p, const Jet& cot,
                                  std::span<double> grad) const {
  Vector g(alpha_.size(), 0.0);
  const Jet u = inner_->backward(to_inner(theta), p, cot, g);
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += alpha_[i] * g[i];
  return u;
}

std::string TimeAffineWrapper::describe() const {
  return inner_->describe() + " local time s=" + format_double(scale_) + "*(t-" + format_double(t0_) + ")";
}

Jet TimeAffineWrapper::forward(std::span<const double> theta, const Point& p) const {
  Jet u = inner_->forward(theta, local(p));
  u.t() *= scale_;
  u.xt() *= scale_;
  u.tt() *= scale_ * scale_;
  return u;
}

Jet TimeAffineWrapper::backward(std::span<const double> theta, const Point& p, const Jet& cot,
                                std::span<double> grad) const {
  Jet c = cot;
  c.t() *= scale_;
  c.xt() *= scale_;
  c.tt() *= scale_ * scale_;
  Jet u = inner_->backward(theta, local(p), c, grad);
  u.t() *= scale_;
  u.xt() *= scale_;
  u.tt() *= scale_ * scale_;
  return u;
}

ModelPtr wrap_hard_bc_multiply(ModelPtr inner, JetFunction eta, const std::vector<Point>& boundary,
                               std::string eta_name) {
  return std::make_shared<MultiplyWrapper>(std::move(inner), std::move(eta), boundary, std::move(eta_name));
}

ModelPtr prune_null_parameters(ModelPtr model, std::span<const double> theta, const std::vector<Point>& probes,
                               double tol) {
  const Matrix phi = component_jacobian(*model, theta, probes, Deriv::v);
  Vector norms(phi.rows());
  double biggest = 0.0;
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    norms[i] = norm2(phi.row(i));
    biggest = std::max(biggest, norms[i]);
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < norms.size(); ++i)
    if (norms[i] > tol * biggest) kept.push_back(i);
  if (kept.size() == norms.size()) return model;
  return std::make_shared<RestrictWrapper>(model, std::move(kept), Vector(theta.begin(), theta.end()));
}

ModelPtr wrap_hard_bc_subtract(ModelPtr inner, double x_b, const std::vector<Point>& probes) {
  if (!inner->is_linear()) return std::make_shared<SubtractAtWrapper>(std::move(inner), x_b);
  auto shifted = std::make_shared<SubtractAtWrapper>(std::move(inner), x_b);
  const Vector zero(shifted->num_params(), 0.0);
  return prune_null_parameters(shifted, zero, probes);
}

ModelPtr rescale_features(ModelPtr model, const Vector& alpha) {
  if (const auto* mlp = dynamic_cast<const MlpModel*>(model.get())) {
    MlpSpec spec = mlp->spec();
    if (alpha.size() != spec.input_scale.size()) throw ContractViolation("one scale factor per MLP input required");
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (!std::isfinite(alpha[i])) throw ContractViolation("scale factors must be finite");
      spec.input_scale[i] *= alpha[i];
    }
    return std::make_shared<MlpModel>(spec);
  }
  return std::make_shared<ScaledParamsWrapper>(std::move(model), alpha);
}

Jet sin_eta(const Point& p) {
  Jet e;
  const double s = std::sin(p.x);
  const double c = std::cos(p.x);
  e.v() = s;
  e.x() = c;
  e.xx() = -s;
  return e;
}

}  // namespace piml
