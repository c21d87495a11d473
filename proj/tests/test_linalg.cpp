#include <cmath>

#include "doctest.h"
#include "piml/linalg.hpp"
#include "piml/rng.hpp"

using namespace piml;

TEST_CASE("jacobi eigenvalues of a 2x2 matrix") {
  Matrix a(2, 2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 2;
  const auto e = jacobi_eigen(a);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("jacobi eigenpairs satisfy A v = lambda v") {
  Rng rng(7);
  const std::size_t n = 12;
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.normal();
  const Matrix a = b.transpose() * b;
  const auto e = jacobi_eigen(a);
  for (std::size_t j = 0; j < n; ++j) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = e.vectors(i, j);
    const Vector av = a * v;
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(av[i] - e.values[j] * v[i]) < 1e-10 * (1 + e.values.back()));
  }
  for (std::size_t j = 1; j < n; ++j) CHECK(e.values[j] >= e.values[j - 1]);
}

TEST_CASE("cholesky and lu solves") {
  Matrix a(3, 3);
  const double vals[] = {4, 1, 0, 1, 3, 1, 0, 1, 2};
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = vals[i];
  const Vector x{1, -2, 3};
  const Vector b = a * x;
  const auto c = cholesky_solve(a, b);
  REQUIRE(c);
  const auto l = lu_solve(a, b);
  REQUIRE(l);
  for (int i = 0; i < 3; ++i) {
    CHECK((*c)[i] == doctest::Approx(x[i]).epsilon(1e-12));
    CHECK((*l)[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
  Matrix s(2, 2, 1.0);
  CHECK_FALSE(lu_solve(s, Vector{1, 2}));
  s(1, 1) = -1.0;
  CHECK_FALSE(cholesky_solve(s, Vector{1, 2}));
}

TEST_CASE("log-log fit recovers a power law") {
  const Vector x{1, 2, 4, 8, 16};
  Vector y;
  for (double v : x) y.push_back(3.0 * v * v);
  const auto f = fit_loglog(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.slope_halfwidth < 1e-10);
  CHECK(f.points == 5);
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 5; ++i) CHECK(a.next() == b.next());
  Rng s1 = Rng(42).substream("interior"), s2 = Rng(42).substream("boundary");
  CHECK(s1.seed() != s2.seed());
  CHECK(Rng(42).substream(3).seed() == Rng(42).substream(3).seed());
}
