#include "piml/model.hpp"

#include "piml/errors.hpp"

namespace piml {

int deriv_order(Deriv d) {
  switch (d) {
    case Deriv::v: return 0;
    case Deriv::x:
    case Deriv::t: return 1;
    default: return 2;
  }
}

std::string to_string(Deriv d) {
  static const char* names[] = {"u", "u_x", "u_t", "u_xx", "u_xt", "u_tt"};
  return names[static_cast<int>(d)];
}

Jet jet_product(const Jet& a, const Jet& b) {
  Jet r;
  r.v() = a.v() * b.v();
  r.x() = a.x() * b.v() + a.v() * b.x();
  r.t() = a.t() * b.v() + a.v() * b.t();
  r.xx() = a.xx() * b.v() + 2.0 * a.x() * b.x() + a.v() * b.xx();
  r.xt() = a.xt() * b.v() + a.x() * b.t() + a.t() * b.x() + a.v() * b.xt();
  r.tt() = a.tt() * b.v() + 2.0 * a.t() * b.t() + a.v() * b.tt();
  return r;
}

Jet LinearModel::forward(std::span<const double> theta, const Point& p) const {
  thread_local std::vector<Jet> b;
  basis(p, b);
  Jet out;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (int k = 0; k < kJetSize; ++k) out.c[k] += theta[i] * b[i].c[k];
  return out;
}

Jet LinearModel::backward(std::span<const double> theta, const Point& p, const Jet& cot,
                          std::span<double> grad) const {
  thread_local std::vector<Jet> b;
  basis(p, b);
  Jet out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (int k = 0; k < kJetSize; ++k) out.c[k] += theta[i] * b[i].c[k];
    grad[i] += b[i].contract(cot);
  }
  return out;
}

std::vector<Vector> evaluate(const Model& model, std::span<const double> theta, const std::vector<Point>& points,
                             const std::vector<Deriv>& orders) {
  for (Deriv d : orders)
    if (deriv_order(d) > model.max_order())
      throw CapabilityError(model.name() + " does not provide " + to_string(d));
  std::vector<Vector> out(orders.size(), Vector(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Jet u = model.forward(theta, points[j]);
    for (std::size_t k = 0; k < orders.size(); ++k) out[k][j] = u[orders[k]];
  }
  return out;
}

Matrix component_jacobian(const Model& model, std::span<const double> theta, const std::vector<Point>& points,
                          Deriv d) {
  if (deriv_order(d) > model.max_order()) throw CapabilityError(model.name() + " does not provide " + to_string(d));
  const std::size_t n = model.num_params();
  Matrix out(n, points.size());
  Vector g(n);
  Jet cot;
  cot[d] = 1.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    std::fill(g.begin(), g.end(), 0.0);
    model.backward(theta, points[j], cot, g);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = g[i];
  }
  return out;
}

TangentFeatures parameter_jacobian(const Model& model, std::span<const double> theta, const std::vector<Point>& points,
                                   const OperatorLinearization* op) {
  TangentFeatures tf;
  tf.phi = component_jacobian(model, theta, points, Deriv::v);
  if (op == nullptr) return tf;
  const std::size_t n = model.num_params();
  tf.l_phi = Matrix(n, points.size());
  Vector g(n);
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Jet u = model.forward(theta, points[j]);
    const Jet coeff = (*op)(points[j], u);
    std::fill(g.begin(), g.end(), 0.0);
    model.backward(theta, points[j], coeff, g);
    for (std::size_t i = 0; i < n; ++i) tf.l_phi(i, j) = g[i];
  }
  return tf;
}

}  // namespace piml
