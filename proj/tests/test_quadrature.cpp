#include <cmath>
#include <numbers>

#include "doctest.h"
#include "piml/errors.hpp"
#include "piml/linalg.hpp"
#include "piml/quadrature.hpp"

using namespace piml;

namespace {

constexpr double pi = std::numbers::pi;

double integrand(const Point& p) { return std::exp(p.x) * std::sin(pi * p.x); }

// int_0^1 e^x sin(pi x) dx by two integrations by parts.
double integrand_exact() { return pi * (std::exp(1.0) + 1.0) / (1.0 + pi * pi); }

}  // namespace

TEST_CASE("midpoint rule integrates affine functions exactly") {
  const auto q = midpoint_rule(Box::rect(0, 2, -1, 1), 5);
  CHECK(q.size() == 25);
  CHECK(q.total_weight() == doctest::Approx(4.0).epsilon(1e-14));
  const double v = estimate_integral(q, [](const Point& p) { return 3 * p.x - 2 * p.t + 1; });
  CHECK(v == doctest::Approx(16.0).epsilon(1e-13));
}

TEST_CASE("midpoint error shrinks by four per halving") {
  double prev = 0.0;
  for (int m : {8, 16, 32, 64}) {
    const double e = std::abs(estimate_integral(midpoint_rule(Box::interval(0, 1), m), integrand) - integrand_exact());
    if (prev > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.02));
    prev = e;
  }
}

TEST_CASE("monte carlo rule is seeded and unbiased in the weights") {
  const Box b = Box::interval(-1, 3);
  const auto a = monte_carlo_rule(b, 100, 5), c = monte_carlo_rule(b, 100, 5), d = monte_carlo_rule(b, 100, 6);
  CHECK(a.points[17].x == c.points[17].x);
  CHECK(a.points[17].x != d.points[17].x);
  CHECK(a.total_weight() == doctest::Approx(4.0).epsilon(1e-14));
  for (const auto& p : a.points) CHECK(b.contains_open(p));
}

TEST_CASE("monte carlo error decays like n^-1/2") {
  // Mean absolute error over seeds at two sizes 16x apart: ratio near 4.
  auto mean_err = [](int n) {
    double s = 0.0;
    for (int seed = 0; seed < 200; ++seed)
      s += std::abs(estimate_integral(monte_carlo_rule(Box::interval(0, 1), n, 1000 + seed), integrand) -
                    integrand_exact());
    return s / 200.0;
  };
  const double ratio = mean_err(64) / mean_err(1024);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.3);
}

TEST_CASE("degenerate domains are rejected") {
  CHECK_THROWS_AS(midpoint_rule(Box::interval(1, 1), 4), InvalidDomainError);
  CHECK_THROWS_AS(midpoint_rule(Box::interval(0, 1), 0), InvalidDomainError);
  CHECK_THROWS_AS(monte_carlo_rule(Box::rect(0, 1, 2, 2), 10, 0), InvalidDomainError);
}

TEST_CASE("non-finite integrand names the point") {
  const auto q = midpoint_rule(Box::interval(0, 1), 4);
  try {
    estimate_integral(q, [](const Point& p) { return p.x > 0.5 ? std::nan("") : 1.0; });
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("x=0.625") != std::string::npos);
  }
}

TEST_CASE("training sets for stationary and space-time domains") {
  const SpaceTimeDomain interval{0, 1, 0, false};
  TrainingSetSpec spec;
  spec.n_int = 10;
  const auto s = make_training_set(interval, spec);
  CHECK(s.interior.size() == 10);
  CHECK(s.spatial_boundary.size() == 2);
  CHECK(s.temporal_boundary.empty());

  const SpaceTimeDomain periodic{-pi, pi, 0, true};
  CHECK(make_training_set(periodic, spec).spatial_boundary.size() == 1);

  const SpaceTimeDomain heat{0, 1, 1, false};
  spec.n_int = 64;
  spec.n_s = 16;
  spec.n_t = 12;
  const auto h = make_training_set(heat, spec);
  CHECK(h.interior.size() == 64);
  CHECK(h.spatial_boundary.size() == 16);
  CHECK(h.spatial_boundary.total_weight() == doctest::Approx(2.0));
  CHECK(h.temporal_boundary.size() == 12);
  for (const auto& p : h.temporal_boundary.points) CHECK(p.t == 0.0);

  const auto f = refine_training_set(heat, spec, 4);
  CHECK(f.interior.size() == 32 * 32);
  CHECK(f.temporal_boundary.size() == 48);
}

TEST_CASE("monte carlo training sets depend only on the seed") {
  const SpaceTimeDomain heat{0, 1, 1, false};
  TrainingSetSpec spec;
  spec.kind = RuleKind::monte_carlo;
  spec.seed = 9;
  const auto a = make_training_set(heat, spec), b = make_training_set(heat, spec);
  CHECK(a.interior.points[3].t == b.interior.points[3].t);
  CHECK(a.interior.points[3].x != a.temporal_boundary.points[3].x);
}
