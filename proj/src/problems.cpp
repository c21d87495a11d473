#include "piml/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "piml/errors.hpp"
#include "piml/format.hpp"

namespace piml {

using std::numbers::pi;

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::poisson1d: return "poisson1d";
    case ProblemKind::poisson_neumann: return "poisson_neumann";
    case ProblemKind::heat1d: return "heat1d";
    case ProblemKind::advection1d: return "advection1d";
    case ProblemKind::scl: return "scl";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "poisson1d") return ProblemKind::poisson1d;
  if (s == "poisson_neumann") return ProblemKind::poisson_neumann;
  if (s == "heat1d") return ProblemKind::heat1d;
  if (s == "advection1d") return ProblemKind::advection1d;
  if (s == "scl" || s == "burgers") return ProblemKind::scl;
  throw ConfigError("unknown problem kind '" + s + "'");
}

PdeProblem PdeProblem::poisson1d(double omega) {
  PdeProblem p;
  p.kind_ = ProblemKind::poisson1d;
  p.domain_ = SpaceTimeDomain{-pi, pi, 0.0, true};
  p.omega_ = omega;
  return p;
}

PdeProblem PdeProblem::poisson_interval(double a, double b, double omega) {
  if (!(b > a)) throw InvalidDomainError("empty interval");
  PdeProblem p;
  p.kind_ = ProblemKind::poisson1d;
  p.domain_ = SpaceTimeDomain{a, b, 0.0, false};
  p.omega_ = omega;
  return p;
}

PdeProblem PdeProblem::poisson_neumann() {
  PdeProblem p;
  p.kind_ = ProblemKind::poisson_neumann;
  p.domain_ = SpaceTimeDomain{0.0, 1.0, 0.0, false};
  return p;
}

PdeProblem PdeProblem::heat1d(double t_end) {
  if (!(t_end > 0.0)) throw InvalidDomainError("heat horizon must be positive");
  PdeProblem p;
  p.kind_ = ProblemKind::heat1d;
  p.domain_ = SpaceTimeDomain{0.0, 1.0, t_end, false};
  return p;
}

PdeProblem PdeProblem::advection1d(double beta, double t_end) {
  if (!(t_end > 0.0)) throw InvalidDomainError("advection horizon must be positive");
  PdeProblem p;
  p.kind_ = ProblemKind::advection1d;
  p.domain_ = SpaceTimeDomain{0.0, 2.0 * pi, t_end, true};
  p.beta_ = beta;
  return p;
}

PdeProblem PdeProblem::burgers(double nu, double t_end, double x0) {
  if (nu < 0.0) throw DomainError("viscosity must be nonnegative");
  if (!(t_end > 0.0)) throw InvalidDomainError("horizon must be positive");
  PdeProblem p;
  p.kind_ = ProblemKind::scl;
  p.domain_ = SpaceTimeDomain{0.0, 1.0, t_end, false};
  p.nu_ = nu;
  p.x0_ = x0;
  return p;
}

std::string PdeProblem::name() const { return to_string(kind_); }

std::string PdeProblem::describe() const {
  std::ostringstream os;
  os << name() << " D=[" << format_double(domain_.x_lo) << "," << format_double(domain_.x_hi) << "]";
  if (domain_.time_dependent()) os << " T=" << format_double(domain_.t_end);
  if (domain_.periodic_x) os << " periodic";
  switch (kind_) {
    case ProblemKind::poisson1d: os << " omega=" << format_double(omega_); break;
    case ProblemKind::advection1d: os << " beta=" << format_double(beta_); break;
    case ProblemKind::scl: os << " flux=burgers nu=" << format_double(nu_) << " x0=" << format_double(x0_); break;
    default: break;
  }
  return os.str();
}

int PdeProblem::required_order() const {
  switch (kind_) {
    case ProblemKind::advection1d: return 1;
    case ProblemKind::scl: return nu_ > 0.0 ? 2 : 1;
    default: return 2;
  }
}

void PdeProblem::check_model(const Model& model) const {
  if (model.max_order() < required_order())
    throw CapabilityError(name() + " needs derivatives of order " + std::to_string(required_order()) + " but " +
                          model.name() + " provides " + std::to_string(model.max_order()));
}

double PdeProblem::source(const Point& p) const {
  switch (kind_) {
    case ProblemKind::poisson1d: return -omega_ * omega_ * std::sin(omega_ * p.x);
    case ProblemKind::poisson_neumann: return std::cos(pi * p.x);
    default: return 0.0;
  }
}

double PdeProblem::boundary_value(const Point& p) const {
  switch (kind_) {
    case ProblemKind::poisson1d: return std::sin(omega_ * p.x);
    case ProblemKind::scl:
      if (nu_ > 0.0) return exact_value(p);
      return p.x <= domain_.x_lo ? u_left_ : u_right_;
    default: return 0.0;
  }
}

double PdeProblem::initial_value(double x) const {
  switch (kind_) {
    case ProblemKind::heat1d: return std::sin(pi * x);
    case ProblemKind::advection1d: return std::sin(x);
    case ProblemKind::scl:
      if (nu_ > 0.0) return exact_value(Point{x, 0.0});
      return x < x0_ ? u_left_ : u_right_;
    default: return 0.0;
  }
}

bool PdeProblem::has_exact() const { return true; }

Jet PdeProblem::exact(const Point& p) const {
  Jet u;
  switch (kind_) {
    case ProblemKind::poisson1d: {
      const double s = std::sin(omega_ * p.x), c = std::cos(omega_ * p.x);
      u.v() = s;
      u.x() = omega_ * c;
      u.xx() = -omega_ * omega_ * s;
      return u;
    }
    case ProblemKind::poisson_neumann: {
      const double s = std::sin(pi * p.x), c = std::cos(pi * p.x);
      u.v() = c / (pi * pi);
      u.x() = -s / pi;
      u.xx() = -c;
      return u;
    }
    case ProblemKind::heat1d: {
      const double e = std::exp(-pi * pi * p.t);
      const double s = std::sin(pi * p.x), c = std::cos(pi * p.x);
      u.v() = e * s;
      u.x() = e * pi * c;
      u.t() = -pi * pi * e * s;
      u.xx() = -pi * pi * e * s;
      u.xt() = -pi * pi * e * pi * c;
      u.tt() = std::pow(pi, 4) * e * s;
      return u;
    }
    case ProblemKind::advection1d: {
      const double arg = p.x - beta_ * p.t;
      const double s = std::sin(arg), c = std::cos(arg);
      u.v() = s;
      u.x() = c;
      u.t() = -beta_ * c;
      u.xx() = -s;
      u.xt() = beta_ * s;
      u.tt() = -beta_ * beta_ * s;
      return u;
    }
    case ProblemKind::scl: {
      const double speed = 0.5 * (u_left_ + u_right_);
      const double front = x0_ + speed * p.t;
      if (nu_ == 0.0) {
        u.v() = p.x < front ? u_left_ : u_right_;
        return u;
      }
      // Viscous travelling wave u = m - a tanh(a (x - x0 - s t) / (2 nu)).
      const double m = 0.5 * (u_left_ + u_right_);
      const double a = 0.5 * (u_left_ - u_right_);
      const double k = a / (2.0 * nu_);
      const double th = std::tanh(k * (p.x - front));
      const double d1 = 1.0 - th * th;     // tanh'
      const double d2 = -2.0 * th * d1;    // tanh''
      u.v() = m - a * th;
      u.x() = -a * k * d1;
      u.t() = a * k * speed * d1;
      u.xx() = -a * k * k * d2;
      u.xt() = a * k * k * speed * d2;
      u.tt() = -a * k * k * speed * speed * d2;
      return u;
    }
  }
  throw CapabilityError("no exact solution for " + name());
}

Jet PdeProblem::operator_linearization(const Point&, const Jet& u) const {
  Jet d;
  switch (kind_) {
    case ProblemKind::poisson1d: d.xx() = 1.0; break;
    case ProblemKind::poisson_neumann: d.xx() = -1.0; break;
    case ProblemKind::heat1d:
      d.t() = 1.0;
      d.xx() = -1.0;
      break;
    case ProblemKind::advection1d:
      d.t() = 1.0;
      d.x() = beta_;
      break;
    case ProblemKind::scl:
      d.t() = 1.0;
      d.x() = flux_prime(u.v());
      d.v() = flux_second(u.v()) * u.x();
      d.xx() = -nu_;
      break;
  }
  return d;
}

double PdeProblem::apply_operator(const Point& p, const Jet& u) const {
  switch (kind_) {
    case ProblemKind::scl: return u.t() + flux_prime(u.v()) * u.x() - nu_ * u.xx();
    default: return operator_linearization(p, u).contract(u);
  }
}

OperatorLinearization PdeProblem::linearization() const {
  const PdeProblem copy = *this;
  return [copy](const Point& p, const Jet& u) { return copy.operator_linearization(p, u); };
}

double EntropyData::flux_q(const PdeProblem& problem, double u, double c) {
  const double diff = u - c;
  const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  return sgn * (problem.flux(u) - problem.flux(c));
}

EntropyData EntropyData::for_problem(const PdeProblem& problem, int count) {
  EntropyData e;
  const auto& d = problem.domain();
  double lo = problem.initial_value(d.x_lo), hi = lo;
  for (int i = 0; i <= 4096; ++i) {
    const double v = problem.initial_value(d.x_lo + (d.x_hi - d.x_lo) * i / 4096.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  e.c_lo = lo;
  e.c_hi = hi;
  for (int i = 0; i < count; ++i) e.c_grid.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return e;
}

double heat_constant_c1(double t_end, double c_f) {
  if (!(t_end > 0.0) || c_f < 0.0) throw DomainError("heat bound needs T > 0 and C_f >= 0");
  const double a = 1.0 + 2.0 * c_f;
  return std::sqrt(t_end + a * t_end * t_end * std::exp(a * t_end));
}

double heat_constant_c2(double t_end, double boundary_measure, double c1_norm_u, double c1_norm_v) {
  if (!(t_end > 0.0) || boundary_measure < 0.0 || c1_norm_u < 0.0 || c1_norm_v < 0.0)
    throw DomainError("heat bound constants need nonnegative norms");
  return std::sqrt(std::sqrt(t_end) * std::sqrt(boundary_measure) * (c1_norm_u + c1_norm_v));
}

double heat_stability_rhs(double t_end, double c_f, const HeatResidualNorms& r, double c2) {
  if (r.pde_sq < 0.0 || r.t_sq < 0.0 || r.s < 0.0 || c2 < 0.0) throw DomainError("residual norms must be nonnegative");
  return heat_constant_c1(t_end, c_f) * (r.pde_sq + r.t_sq + c2 * r.s);
}

SclBound scl_stability_rhs(const PdeProblem& problem, const SclNorms& n, const SclResidualNorms& r,
                           std::function<double(const PdeProblem&, const SclNorms&)> c3) {
  if (problem.kind() != ProblemKind::scl) throw DomainError("scl bound requested for " + problem.name());
  if (!(problem.nu() > 0.0))
    throw DomainError("viscous stability bound undefined for nu = 0: ||u_x|| grows like 1/sqrt(nu) and C1 blows up");
  if (r.pde_sq < 0.0 || r.t_sq < 0.0 || r.s < 0.0 || n.u_inf < 0.0 || n.u_theta_inf < 0.0 || n.u_x_inf < 0.0 ||
      n.u_theta_x_inf < 0.0)
    throw DomainError("norms must be nonnegative");
  const double t = problem.domain().t_end;
  SclBound b;
  b.c1 = 1.0 + 2.0 * std::abs(problem.flux_second(std::max(n.u_inf, n.u_theta_inf))) * n.u_x_inf;
  b.c2 = n.u_x_inf + n.u_theta_x_inf;
  if (c3) {
    b.c3 = c3(problem, n);
    b.c3_heuristic = false;
  } else {
    const double m = std::max(n.u_inf, n.u_theta_inf);
    b.c3 = std::abs(problem.flux_prime(m)) * (1.0 + n.u_theta_inf);
  }
  const double pre = t + b.c1 * t * t * std::exp(b.c1 * t);
  b.value = pre * (r.pde_sq + r.t_sq + 2.0 * b.c2 * r.s * r.s + 2.0 * problem.nu() * std::sqrt(t) * b.c3 * r.s);
  return b;
}

double poincare_constant_unit_interval() { return 1.0 / (pi * pi); }

double ritz_h1_bound(double energy_gap) {
  if (energy_gap < 0.0) throw DomainError("energy gap must be nonnegative");
  const double cp = poincare_constant_unit_interval();
  return 2.0 * std::max(2.0 * cp + 1.0, 2.0) * energy_gap;
}

}  // namespace piml
