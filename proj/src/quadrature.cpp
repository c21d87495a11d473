#include "piml/quadrature.hpp"

#include <cmath>
#include <sstream>

#include "piml/errors.hpp"
#include "piml/rng.hpp"

namespace piml {

double Box::volume() const {
  double v = 1.0;
  for (const auto& [lo, hi] : bounds) v *= (hi - lo);
  return bounds.empty() ? 0.0 : v;
}

bool Box::contains_open(const Point& p) const {
  if (bounds.empty()) return false;
  if (!(p.x > bounds[0].first && p.x < bounds[0].second)) return false;
  if (bounds.size() > 1 && !(p.t > bounds[1].first && p.t < bounds[1].second)) return false;
  return true;
}

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::midpoint: return "midpoint";
    case RuleKind::monte_carlo: return "monte-carlo";
    case RuleKind::atoms: return "atoms";
  }
  return "unknown";
}

RuleKind rule_kind_from_string(const std::string& s) {
  if (s == "midpoint") return RuleKind::midpoint;
  if (s == "monte-carlo" || s == "monte_carlo" || s == "mc") return RuleKind::monte_carlo;
  throw ConfigError("unknown quadrature kind '" + s + "' (expected midpoint or monte-carlo)");
}

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

QuadratureRule QuadratureRule::subset(const std::vector<std::size_t>& indices) const {
  QuadratureRule out;
  out.kind = kind;
  out.seed = seed;
  out.points.reserve(indices.size());
  out.weights.reserve(indices.size());
  for (std::size_t i : indices) {
    out.points.push_back(points[i]);
    out.weights.push_back(weights[i]);
  }
  return out;
}

namespace {

void check_box(const Box& box) {
  if (box.dim() == 0 || box.dim() > 2) throw InvalidDomainError("box must have 1 or 2 axes");
  for (const auto& [lo, hi] : box.bounds)
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw InvalidDomainError("box has zero or negative extent");
}

}  // namespace

QuadratureRule midpoint_rule(const Box& box, int m) {
  check_box(box);
  if (m < 1) throw InvalidDomainError("midpoint rule needs M >= 1");
  QuadratureRule rule;
  rule.kind = RuleKind::midpoint;
  const auto [xlo, xhi] = box.bounds[0];
  const double hx = (xhi - xlo) / m;
  if (box.dim() == 1) {
    rule.points.resize(m);
    rule.weights.assign(m, box.volume() / m);
    for (int i = 0; i < m; ++i) rule.points[i] = Point{xlo + (i + 0.5) * hx, 0.0};
    return rule;
  }
  const auto [tlo, thi] = box.bounds[1];
  const double ht = (thi - tlo) / m;
  const std::size_t n = static_cast<std::size_t>(m) * m;
  rule.points.reserve(n);
  rule.weights.assign(n, box.volume() / static_cast<double>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) rule.points.push_back(Point{xlo + (i + 0.5) * hx, tlo + (j + 0.5) * ht});
  return rule;
}

QuadratureRule monte_carlo_rule(const Box& box, int n, std::uint64_t seed) {
  check_box(box);
  if (n < 1) throw InvalidDomainError("Monte Carlo rule needs N >= 1");
  QuadratureRule rule;
  rule.kind = RuleKind::monte_carlo;
  rule.seed = seed;
  rule.points.resize(n);
  rule.weights.assign(n, box.volume() / n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Point p;
    p.x = rng.uniform(box.bounds[0].first, box.bounds[0].second);
    if (box.dim() > 1) p.t = rng.uniform(box.bounds[1].first, box.bounds[1].second);
    rule.points[i] = p;
  }
  return rule;
}

QuadratureRule atom_rule(std::vector<Point> points, double weight) {
  QuadratureRule rule;
  rule.kind = RuleKind::atoms;
  rule.weights.assign(points.size(), weight);
  rule.points = std::move(points);
  return rule;
}

double estimate_integral(const QuadratureRule& rule, const std::function<double(const Point&)>& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = g(rule.points[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite integrand value at point (x=" << rule.points[i].x << ", t=" << rule.points[i].t << ")";
      throw EvaluationError(os.str());
    }
    sum += rule.weights[i] * v;
  }
  return sum;
}

Box SpaceTimeDomain::interior_box() const {
  if (time_dependent()) return Box::rect(x_lo, x_hi, 0.0, t_end);
  return Box::interval(x_lo, x_hi);
}

namespace {

QuadratureRule interior_rule(const SpaceTimeDomain& domain, int n, RuleKind kind, std::uint64_t seed) {
  const Box box = domain.interior_box();
  if (kind == RuleKind::monte_carlo) return monte_carlo_rule(box, n, seed);
  if (domain.time_dependent()) {
    const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
    return midpoint_rule(box, m);
  }
  return midpoint_rule(box, n);
}

QuadratureRule spatial_boundary_rule(const SpaceTimeDomain& domain, int n_s, RuleKind kind, std::uint64_t seed) {
  std::vector<double> ends;
  if (domain.periodic_x) {
    ends = {domain.x_hi};
  } else {
    ends = {domain.x_lo, domain.x_hi};
  }
  if (!domain.time_dependent()) {
    std::vector<Point> pts;
    for (double e : ends) pts.push_back(Point{e, 0.0});
    return atom_rule(std::move(pts), 1.0);
  }
  const int per_side = std::max(1, n_s / static_cast<int>(ends.size()));
  const Box tbox = Box::interval(0.0, domain.t_end);
  QuadratureRule trule = kind == RuleKind::monte_carlo ? monte_carlo_rule(tbox, per_side, seed)
                                                        : midpoint_rule(tbox, per_side);
  QuadratureRule rule;
  rule.kind = trule.kind;
  rule.seed = trule.seed;
  for (double e : ends) {
    for (std::size_t i = 0; i < trule.size(); ++i) {
      rule.points.push_back(Point{e, trule.points[i].x});
      rule.weights.push_back(trule.weights[i]);
    }
  }
  return rule;
}

QuadratureRule temporal_boundary_rule(const SpaceTimeDomain& domain, int n_t, RuleKind kind, std::uint64_t seed) {
  const Box xbox = Box::interval(domain.x_lo, domain.x_hi);
  QuadratureRule rule = kind == RuleKind::monte_carlo ? monte_carlo_rule(xbox, n_t, seed) : midpoint_rule(xbox, n_t);
  for (auto& p : rule.points) p.t = 0.0;
  return rule;
}

}  // namespace

TrainingSet make_training_set(const SpaceTimeDomain& domain, const TrainingSetSpec& spec) {
  const Rng base(spec.seed);
  TrainingSet set;
  set.interior = interior_rule(domain, spec.n_int, spec.kind, base.substream("interior").next());
  set.spatial_boundary = spatial_boundary_rule(domain, spec.n_s, spec.kind, base.substream("spatial").next());
  if (domain.time_dependent())
    set.temporal_boundary = temporal_boundary_rule(domain, spec.n_t, spec.kind, base.substream("temporal").next());
  return set;
}

TrainingSet refine_training_set(const SpaceTimeDomain& domain, const TrainingSetSpec& spec, int factor) {
  TrainingSet set;
  int n_int = spec.n_int * factor;
  if (domain.time_dependent()) {
    const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.n_int)))));
    n_int = (m * factor) * (m * factor);
  }
  set.interior = interior_rule(domain, n_int, RuleKind::midpoint, 0);
  set.spatial_boundary = spatial_boundary_rule(domain, std::max(spec.n_s, 2) * factor, RuleKind::midpoint, 0);
  if (domain.time_dependent())
    set.temporal_boundary = temporal_boundary_rule(domain, spec.n_t * factor, RuleKind::midpoint, 0);
  return set;
}

}  // namespace piml
