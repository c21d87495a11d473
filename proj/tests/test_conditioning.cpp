#include <cmath>
#include <numbers>

#include "doctest.h"
#include "piml/conditioning.hpp"
#include "piml/errors.hpp"
#include "piml/fourier_model.hpp"
#include "piml/losses.hpp"
#include "piml/rng.hpp"

using namespace piml;

namespace {

constexpr double pi = std::numbers::pi;

Matrix random_spd(std::size_t n, Rng& rng, double spread) {
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = rng.normal();
  // Eigenvalues log-uniform in [1, spread] on a random basis.
  const auto e = jacobi_eigen(q.transpose() * q);
  Matrix a(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = std::exp(rng.uniform(0.0, std::log(spread)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) += lam * e.vectors(i, k) * e.vectors(j, k);
  }
  return a;
}

}  // namespace

TEST_CASE("condition number of diagonal and singular matrices") {
  const Matrix d = Matrix::diagonal(Vector{2.0, 20.0, 5.0});
  const auto r = condition_number(d);
  CHECK(r.kappa == doctest::Approx(10.0));
  CHECK(r.lambda_min == doctest::Approx(2.0));
  CHECK(r.near_zero_count == 0);
  const auto s = condition_number(Matrix::diagonal(Vector{1.0, 0.0, 3.0}));
  CHECK(s.singular());
  CHECK(std::isinf(s.kappa));
  CHECK(s.near_zero_count == 1);
  Matrix ns(2, 2);
  ns(0, 1) = 1.0;
  CHECK_THROWS_AS(condition_number(ns), ContractViolation);
  CHECK_THROWS_AS(condition_number(Matrix(2, 3)), ContractViolation);
}

TEST_CASE("lambda heuristics on small examples") {
  CHECK(*lambda_annealing(Vector{4, 1}, Vector{1, 1}) == doctest::Approx(4.0));
  CHECK(*lambda_annealing(Vector{-12, 3}, Vector{1, 1}) == doctest::Approx(12.0));
  CHECK(*lambda_annealing(Vector{8, 2}, Vector{1, 1}) == doctest::Approx(2.0 * *lambda_annealing(Vector{4, 1}, Vector{1, 1})));
  CHECK_FALSE(lambda_annealing(Vector{1, 1}, Vector{0, 0}));
  GramParts p;
  p.interior = Matrix::diagonal(Vector{1.0, 8.0});
  p.boundary = Matrix::diagonal(Vector{0.5, 0.5});
  CHECK(*lambda_ntk(p) == doctest::Approx(9.0));
  p.boundary = Matrix(2, 2);
  CHECK_FALSE(lambda_ntk(p));
}

TEST_CASE("toy hard-boundary survey") {
  const auto s = hard_bc_condition_survey();
  CHECK(s.kappa_soft == doctest::Approx(3 + 2 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(s.lambda_star == doctest::Approx(pi / 4).epsilon(1e-4));
  CHECK(std::abs(s.kappa_variant1 - 4.0) < 1e-6);
  CHECK(std::abs(s.kappa_variant2 - 1.0) < 1e-9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(s.a_soft(i, j) == doctest::Approx(s.a_soft_analytic(i, j)).epsilon(1e-6).scale(1.0));
}

TEST_CASE("lambda search finds the grid minimum and refines it") {
  GramParts p;
  p.interior = Matrix::diagonal(Vector{1.0, 4.0, 0.0});
  p.boundary = Matrix::diagonal(Vector{0.0, 0.0, 1.0});
  // kappa(lambda) = max(4, lambda) / min(1, lambda): minimal on [1, 4].
  const auto r = lambda_search(p, log_grid(1e-3, 1e3, 61));
  CHECK(r.kappa_star == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.lambda_star >= 1.0 - 1e-9);
  CHECK(r.lambda_star <= 4.0 + 1e-9);
  CHECK(r.curve.size() == 61);
  const auto g = log_grid(1e-2, 1e2, 5);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1e2));
}

TEST_CASE("loss hessian is twice the quadrature gram matrix") {
  const auto prob = PdeProblem::poisson1d();
  const FourierFeatureModel m(FourierSpec{4, 0, true});
  TrainingSetSpec spec;
  spec.n_int = 64;
  const auto set = make_training_set(prob.domain(), spec);
  const double lambda = 3.0;
  LossWeights w;
  w.s = lambda;
  const Vector th(m.num_params(), 0.2);
  const Matrix a = combine(assemble_gram_parts(prob, m, Vector(m.num_params(), 0.0), set), lambda).a;
  const Matrix h = loss_hessian(prob, m, th, set, w);
  // Central differences of the analytic gradient.
  const double eps = 1e-4;
  for (std::size_t j = 0; j < th.size(); ++j) {
    Vector p = th, q = th, gp, gq;
    p[j] += eps;
    q[j] -= eps;
    strong_loss(prob, m, p, set, w, &gp);
    strong_loss(prob, m, q, set, w, &gq);
    for (std::size_t i = 0; i < th.size(); ++i) {
      const double fd = (gp[i] - gq[i]) / (2 * eps);
      CHECK(std::abs(fd - 2 * a(i, j)) <= 1e-6 * std::max(1.0, std::abs(2 * a(i, j))));
      CHECK(std::abs(h(i, j) - 2 * a(i, j)) <= 1e-10 * std::max(1.0, std::abs(2 * a(i, j))));
    }
  }
}

TEST_CASE("contraction bound on random SPD systems") {
  Rng rng(11);
  for (int s = 0; s < 10; ++s) {
    const std::size_t n = 3 + static_cast<std::size_t>(s);
    GramSystem sys{random_spd(n, rng, 50.0), Vector(n, 1.0), 1.0, "random"};
    const double lmax = condition_number(sys.a).lambda_max;
    const auto r = simplified_gd(sys, Vector(n, 0.0), 0.9 / lmax, 200);
    CHECK(r.bound_holds);
    CHECK(r.errors.back() < r.errors.front());
  }
}

TEST_CASE("steps to tolerance") {
  CHECK(*steps_to_tolerance(10.0, 1.0, 1.0, 1.0) == 0);
  // (1 - 0.1)^k <= 1e-3  <=>  k >= 65.56.
  CHECK(*steps_to_tolerance(10.0, 1.0, 1.0, 1e-3) == 66);
  CHECK_FALSE(steps_to_tolerance(INFINITY, 1.0, 1.0, 1e-3));
  CHECK_THROWS_AS(steps_to_tolerance(10.0, 20.0, 1.0, 1e-3), DomainError);
}

TEST_CASE("inverse-k2 preconditioning flattens the fourier spectrum") {
  const auto prob = PdeProblem::poisson1d();
  double prev = INFINITY;
  for (double gamma : {10.0, 100.0, 1000.0}) {
    const FourierFeatureModel m(FourierSpec{8, 0, true});
    const GramParts parts = assemble_gram_parts(prob, m, Vector(m.num_params(), 0.0), fine_gram_rules(prob));
    const GramParts pre = precondition(parts, fourier_inverse_k2(m, gamma));
    const double k = condition_number(combine(pre, 2 * pi / (gamma * gamma)).a).kappa;
    CHECK(k < prev);
    CHECK(k >= 1.0);
    prev = k;
  }
  CHECK(prev < 1.01);
}

TEST_CASE("time-window split lowers the advection condition number") {
  const auto s = domain_split_survey(4.0, 2);
  REQUIRE(s.kappa_windows.size() == 2);
  for (double k : s.kappa_windows) CHECK(k < s.kappa_unsplit);
}
