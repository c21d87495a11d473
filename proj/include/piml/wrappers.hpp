#ifndef PIML_WRAPPERS_HPP_
#define PIML_WRAPPERS_HPP_

#include <functional>

#include "piml/model.hpp"

namespace piml {

// Jet of a fixed smooth function of (x, t).
using JetFunction = std::function<Jet(const Point&)>;

// u(x, t) = eta(x, t) * inner(x, t). The constructor checks that eta vanishes
// at every listed boundary point and throws ContractViolation otherwise.
class MultiplyWrapper : public Model {
 public:
  MultiplyWrapper(ModelPtr inner, JetFunction eta, const std::vector<Point>& boundary, std::string eta_name = "eta");

  std::string name() const override { return "hard-bc-multiply(" + inner_->name() + ")"; }
  ParameterLayout layout() const override { return inner_->layout(); }
  std::size_t num_params() const override { return inner_->num_params(); }
  bool is_linear() const override { return inner_->is_linear(); }
  int max_order() const override { return inner_->max_order(); }
  std::string describe() const override { return inner_->describe() + " * " + eta_name_; }
  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot, std::span<double> grad) const override;

 private:
  ModelPtr inner_;
  JetFunction eta_;
  std::string eta_name_;
};

// u(x, t) = inner(x, t) - inner(x_b, t).
class SubtractAtWrapper : public Model {
 public:
  SubtractAtWrapper(ModelPtr inner, double x_b) : inner_(std::move(inner)), x_b_(x_b) {}

  std::string name() const override { return "hard-bc-subtract(" + inner_->name() + ")"; }
  ParameterLayout layout() const override { return inner_->layout(); }
  std::size_t num_params() const override { return inner_->num_params(); }
  bool is_linear() const override { return inner_->is_linear(); }
  int max_order() const override { return inner_->max_order(); }
  std::string describe() const override;
  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot, std::span<double> grad) const override;

 private:
  ModelPtr inner_;
  double x_b_;
};

// Exposes a subset of the inner parameters; the others stay at `frozen`.
class RestrictWrapper : public Model {
 public:
  RestrictWrapper(ModelPtr inner, std::vector<std::size_t> kept, Vector frozen);

  std::string name() const override { return inner_->name(); }
  ParameterLayout layout() const override;
  std::size_t num_params() const override { return kept_.size(); }
  bool is_linear() const override { return inner_->is_linear(); }
  int max_order() const override { return inner_->max_order(); }
  std::string describe() const override;
  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot, std::span<double> grad) const override;

  const std::vector<std::size_t>& kept() const { return kept_; }
  Vector expand(std::span<const double> theta) const;

 private:
  ModelPtr inner_;
  std::vector<std::size_t> kept_;
  Vector frozen_;
};

// u(theta) = inner(alpha * theta) componentwise: the tangent features are
// multiplied by alpha.
class ScaledParamsWrapper : public Model {
 public:
  ScaledParamsWrapper(ModelPtr inner, Vector alpha);

  std::string name() const override { return inner_->name(); }
  ParameterLayout layout() const override { return inner_->layout(); }
  std::size_t num_params() const override { return inner_->num_params(); }
  bool is_linear() const override { return inner_->is_linear(); }
  int max_order() const override { return inner_->max_order(); }
  std::string describe() const override { return inner_->describe() + " rescaled"; }
  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot, std::span<double> grad) const override;

  const Vector& alpha() const { return alpha_; }
  Vector to_inner(std::span<const double> theta) const;

 private:
  ModelPtr inner_;
  Vector alpha_;
};

// u(x, t) = inner(x, scale * (t - t0)); used for time-window submodels.
class TimeAffineWrapper : public Model {
 public:
  TimeAffineWrapper(ModelPtr inner, double t0, double scale) : inner_(std::move(inner)), t0_(t0), scale_(scale) {}

  std::string name() const override { return inner_->name(); }
  ParameterLayout layout() const override { return inner_->layout(); }
  std::size_t num_params() const override { return inner_->num_params(); }
  bool is_linear() const override { return inner_->is_linear(); }
  int max_order() const override { return inner_->max_order(); }
  std::string describe() const override;
  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot, std::span<double> grad) const override;

 private:
  Point local(const Point& p) const { return Point{p.x, scale_ * (p.t - t0_)}; }
  ModelPtr inner_;
  double t0_, scale_;
};

ModelPtr wrap_hard_bc_multiply(ModelPtr inner, JetFunction eta, const std::vector<Point>& boundary,
                               std::string eta_name = "eta");

// Subtracts the value at x_b and drops parameters whose tangent features
// vanish identically on the probe points (the constant mode for Fourier
// models). Pruning requires a linear inner model.
ModelPtr wrap_hard_bc_subtract(ModelPtr inner, double x_b, const std::vector<Point>& probes);

// Parameters i with ||phi_i|| <= tol * max_j ||phi_j|| on the probes are
// removed; returns the inner model unchanged if none qualify.
ModelPtr prune_null_parameters(ModelPtr model, std::span<const double> theta, const std::vector<Point>& probes,
                               double tol = 1e-12);

// Multiplies the model's features by alpha. For MLPs alpha scales the input
// features (one entry per input); otherwise it scales the parameters'
// tangent features (one entry per parameter).
ModelPtr rescale_features(ModelPtr model, const Vector& alpha);

// eta(x) = sin(x) as a jet; vanishes at multiples of pi.
Jet sin_eta(const Point& p);

}  // namespace piml

#endif  // PIML_WRAPPERS_HPP_
