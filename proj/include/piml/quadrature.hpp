#ifndef PIML_QUADRATURE_HPP_
#define PIML_QUADRATURE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "piml/linalg.hpp"

namespace piml {

// A point of the space-time domain. Stationary problems leave t = 0.
struct Point {
  double x = 0.0;
  double t = 0.0;
};

// Axis-aligned box in 1 or 2 dimensions (x, then t).
struct Box {
  std::vector<std::pair<double, double>> bounds;

  static Box interval(double lo, double hi) { return Box{{{lo, hi}}}; }
  static Box rect(double xlo, double xhi, double tlo, double thi) { return Box{{{xlo, xhi}, {tlo, thi}}}; }

  std::size_t dim() const { return bounds.size(); }
  double volume() const;
  bool contains_open(const Point& p) const;
};

enum class RuleKind { midpoint, monte_carlo, atoms };

std::string to_string(RuleKind kind);
RuleKind rule_kind_from_string(const std::string& s);

struct QuadratureRule {
  std::vector<Point> points;
  Vector weights;
  RuleKind kind = RuleKind::midpoint;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double total_weight() const;

  // Keeps only the listed points.
  QuadratureRule subset(const std::vector<std::size_t>& indices) const;
};

// Tensor-product midpoint rule with M cells per axis; throws
// InvalidDomainError for boxes without positive volume or M < 1.
QuadratureRule midpoint_rule(const Box& box, int m);

// N i.i.d. uniform points with equal weights |box|/N.
QuadratureRule monte_carlo_rule(const Box& box, int n, std::uint64_t seed);

// Point masses; 1D spatial boundaries use these with unit weight.
QuadratureRule atom_rule(std::vector<Point> points, double weight = 1.0);

// sum_i w_i g(y_i). A non-finite g value raises EvaluationError naming the
// offending point.
double estimate_integral(const QuadratureRule& rule, const std::function<double(const Point&)>& g);

// Space-time domain D x [0, T] with D = [x_lo, x_hi]; t_end == 0 means a
// stationary problem on D.
struct SpaceTimeDomain {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double t_end = 0.0;
  bool periodic_x = false;  // spatial boundary reduces to the single atom x_hi

  bool time_dependent() const { return t_end > 0.0; }
  Box interior_box() const;
};

struct TrainingSetSpec {
  int n_int = 64;
  int n_s = 2;
  int n_t = 32;
  RuleKind kind = RuleKind::midpoint;
  std::uint64_t seed = 0;
};

struct TrainingSet {
  QuadratureRule interior;
  QuadratureRule spatial_boundary;
  QuadratureRule temporal_boundary;       // empty for stationary problems
  std::optional<QuadratureRule> data_set;  // observation points for inverse problems
};

// Builds S = (S_int, S_s, S_t). Midpoint interiors in space-time use
// round(sqrt(n_int)) cells per axis. Stationary 1D boundaries are atoms
// (n_s ignored); time-dependent spatial boundaries place n_s/2 time nodes on
// each endpoint, weighted by the time rule.
TrainingSet make_training_set(const SpaceTimeDomain& domain, const TrainingSetSpec& spec);

// Midpoint training set whose interior/temporal rules are `factor` times
// finer per axis than `spec`; used for generalization-error estimates.
TrainingSet refine_training_set(const SpaceTimeDomain& domain, const TrainingSetSpec& spec, int factor);

}  // namespace piml

#endif  // PIML_QUADRATURE_HPP_
