#ifndef PIML_MODEL_HPP_
#define PIML_MODEL_HPP_

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "piml/linalg.hpp"
#include "piml/parameters.hpp"
#include "piml/quadrature.hpp"

namespace piml {

// Derivative components carried through every model evaluation.
enum class Deriv : int { v = 0, x = 1, t = 2, xx = 3, xt = 4, tt = 5 };
constexpr int kJetSize = 6;

int deriv_order(Deriv d);
std::string to_string(Deriv d);

// Value and all space/time derivatives up to total order 2 at one point.
struct Jet {
  std::array<double, kJetSize> c{};

  double& operator[](Deriv d) { return c[static_cast<int>(d)]; }
  double operator[](Deriv d) const { return c[static_cast<int>(d)]; }
  double& v() { return c[0]; }
  double v() const { return c[0]; }
  double& x() { return c[1]; }
  double x() const { return c[1]; }
  double& t() { return c[2]; }
  double t() const { return c[2]; }
  double& xx() { return c[3]; }
  double xx() const { return c[3]; }
  double& xt() { return c[4]; }
  double xt() const { return c[4]; }
  double& tt() { return c[5]; }
  double tt() const { return c[5]; }

  static Jet constant(double value) {
    Jet j;
    j.c[0] = value;
    return j;
  }
  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < kJetSize; ++i) c[i] += o.c[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < kJetSize; ++i) c[i] -= o.c[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c) v *= s;
    return *this;
  }
  double contract(const Jet& o) const {
    double s = 0.0;
    for (int i = 0; i < kJetSize; ++i) s += c[i] * o.c[i];
    return s;
  }
};

// Product rule for jets: derivatives of a(x,t) * b(x,t).
Jet jet_product(const Jet& a, const Jet& b);

// Parametric function u(x, t; theta).
//
// backward() is the workhorse: it returns the forward jet and adds
// sum_c cot[c] * d jet[c] / d theta to grad. One call therefore yields the
// parameter gradient of any scalar that is linear in the jet, e.g. the
// operator-composed tangent feature L phi_i = d (L u) / d theta_i.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual ParameterLayout layout() const = 0;
  virtual std::size_t num_params() const = 0;
  virtual bool is_linear() const { return false; }
  // Highest total derivative order available.
  virtual int max_order() const { return 2; }

  virtual Jet forward(std::span<const double> theta, const Point& p) const = 0;
  virtual Jet backward(std::span<const double> theta, const Point& p, const Jet& cot,
                       std::span<double> grad) const = 0;

  // Key/value description echoed into run records.
  virtual std::string describe() const { return name(); }
};

using ModelPtr = std::shared_ptr<const Model>;

// Linear models u = sum_i theta_i b_i(x, t); subclasses provide the basis.
class LinearModel : public Model {
 public:
  bool is_linear() const override { return true; }
  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot,
               std::span<double> grad) const override;

  // Fills out[i] with the jet of basis function i at p (out is resized).
  virtual void basis(const Point& p, std::vector<Jet>& out) const = 0;
};

// Values of the requested derivatives at each point: result[k][j] is the
// k-th requested derivative at points[j]. Throws CapabilityError for orders
// above model.max_order().
std::vector<Vector> evaluate(const Model& model, std::span<const double> theta, const std::vector<Point>& points,
                             const std::vector<Deriv>& orders = {Deriv::v});

// Pointwise linearization of a differential operator: given the point and the
// model jet there, returns d(L u)/d(jet). For linear operators the result does
// not depend on the jet.
using OperatorLinearization = std::function<Jet(const Point&, const Jet&)>;

struct TangentFeatures {
  Matrix phi;    // phi(i, j) = d u(points_j) / d theta_i
  Matrix l_phi;  // (L phi_i)(points_j); empty when no operator was given
  bool has_operator() const { return l_phi.rows() > 0; }
};

TangentFeatures parameter_jacobian(const Model& model, std::span<const double> theta, const std::vector<Point>& points,
                                   const OperatorLinearization* op = nullptr);

// Jacobian of one derivative component: rows are parameters, columns points.
Matrix component_jacobian(const Model& model, std::span<const double> theta, const std::vector<Point>& points,
                          Deriv d);

}  // namespace piml

#endif  // PIML_MODEL_HPP_
