#include <cmath>
#include <cstdio>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "piml/errors.hpp"
#include "piml/fourier_model.hpp"
#include "piml/mlp_model.hpp"
#include "piml/parameters.hpp"
#include "piml/quadrature.hpp"
#include "piml/wrappers.hpp"

using namespace piml;

namespace {

constexpr double pi = std::numbers::pi;

Vector random_theta(std::size_t n, std::uint64_t seed, double sd = 0.5) {
  Rng r(seed);
  Vector v(n);
  for (double& x : v) x = r.normal(0.0, sd);
  return v;
}

void require_clean(const oracle::DerivativeCheck& c) {
  INFO("worst first-order entry: " << c.worst);
  CHECK(c.first <= 1e-5);
  CHECK(c.second <= 1e-5);
  CHECK(c.mixed <= 1e-4);
}

}  // namespace

TEST_CASE("fourier space-time derivatives against finite differences") {
  const FourierFeatureModel m(FourierSpec{3, 2, true});
  CHECK(m.num_params() == 7 * 5);
  const auto problem = PdeProblem::advection1d(2.0);
  require_clean(oracle::check_derivatives(m, random_theta(m.num_params(), 1), {{0, 2 * pi}, {0, 1}}, 20, 2, &problem));
}

TEST_CASE("mlp derivatives against finite differences") {
  MlpModel m(MlpSpec{2, {6, 5}, {}, 2});
  const Vector th = xavier_init(m, 1.0, 3).values();
  const auto heat = PdeProblem::heat1d();
  require_clean(oracle::check_derivatives(m, th, {{0, 1}, {0, 1}}, 20, 4, &heat));
  const auto burgers = PdeProblem::burgers(0.01);
  require_clean(oracle::check_derivatives(m, th, {{0, 1}, {0, 0.5}}, 20, 5, &burgers));
  MlpModel m1(MlpSpec{1, {8}, {}, 2});
  const auto poisson = PdeProblem::poisson_interval(0, 1, pi);
  require_clean(oracle::check_derivatives(m1, xavier_init(m1, 1.0, 6).values(), {{0, 1}}, 20, 7, &poisson));
}

TEST_CASE("wrapped models keep exact derivatives") {
  auto inner = std::make_shared<FourierFeatureModel>(FourierSpec{2, 0, false});
  const auto poisson = PdeProblem::poisson1d();
  const Vector th = random_theta(inner->num_params(), 8);
  const MultiplyWrapper mul(inner, sin_eta, {Point{-pi, 0}, Point{pi, 0}}, "sin");
  require_clean(oracle::check_derivatives(mul, th, {{-pi, pi}}, 20, 9, &poisson));
  const SubtractAtWrapper sub(inner, pi);
  require_clean(oracle::check_derivatives(sub, th, {{-pi, pi}}, 20, 10, &poisson));
  const ScaledParamsWrapper sc(inner, Vector{1, 0.25, 3, 0.25, 1});
  require_clean(oracle::check_derivatives(sc, th, {{-pi, pi}}, 20, 11, &poisson));

  auto mlp = std::make_shared<MlpModel>(MlpSpec{2, {5}, {}, 2});
  const TimeAffineWrapper ta(mlp, 0.5, 2.0);
  require_clean(oracle::check_derivatives(ta, xavier_init(*mlp, 1.0, 12).values(), {{0, 1}, {0.5, 1}}, 20, 13));
}

TEST_CASE("hard boundary wrappers vanish on the boundary") {
  auto inner = std::make_shared<FourierFeatureModel>(FourierSpec{2, 0, false});
  const Vector th = random_theta(inner->num_params(), 14);
  const MultiplyWrapper mul(inner, sin_eta, {Point{-pi, 0}, Point{pi, 0}});
  CHECK(std::abs(mul.forward(th, Point{pi, 0}).v()) < 1e-14);
  CHECK(std::abs(mul.forward(th, Point{-pi, 0}).v()) < 1e-14);
  CHECK_THROWS_AS(MultiplyWrapper(inner, sin_eta, {Point{1.0, 0}}), ContractViolation);

  std::vector<Point> probes;
  for (int i = 0; i < 16; ++i) probes.push_back(Point{-pi + 2 * pi * (i + 0.5) / 16, 0});
  const ModelPtr sub = wrap_hard_bc_subtract(inner, pi, probes);
  CHECK(sub->num_params() == inner->num_params() - 1);
  CHECK(std::abs(sub->forward(random_theta(sub->num_params(), 15), Point{pi, 0}).v()) < 1e-14);
}

TEST_CASE("fourier normalized basis is orthonormal on the period") {
  const FourierFeatureModel m(FourierSpec{4, 0, true});
  const auto q = midpoint_rule(Box::interval(-pi, pi), 256);
  const std::size_t n = m.num_params();
  const TangentFeatures f = parameter_jacobian(m, Vector(n, 0.0), q.points);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k) s += q.weights[k] * f.phi(i, k) * f.phi(j, k);
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
  CHECK(m.spatial_index(0) == -4);
  CHECK(m.spatial_index(4) == 0);
  CHECK(m.spatial_index(8) == 4);
}

TEST_CASE("mlp layout and xavier variance") {
  const MlpModel m(MlpSpec{2, {3, 4}, {}, 2});
  CHECK(m.num_params() == 3 * 2 + 3 + 4 * 3 + 4 + 4 + 1);
  const MlpModel wide(MlpSpec{1, {300, 300}, {}, 1});
  const ParameterVector th = xavier_init(wide, 1.5, 16);
  const std::size_t off = wide.weight_offset(1);
  double s2 = 0.0;
  for (std::size_t i = 0; i < 300 * 300; ++i) s2 += th[off + i] * th[off + i];
  CHECK(s2 / (300.0 * 300.0) == doctest::Approx(2 * 1.5 * 1.5 / 600.0).epsilon(0.02));
  CHECK(th[wide.bias_offset(0)] == 0.0);
}

TEST_CASE("derivative order beyond the model capability is refused") {
  const MlpModel m(MlpSpec{1, {4}, {}, 1});
  const Vector th(m.num_params(), 0.1);
  CHECK_THROWS_AS(evaluate(m, th, {Point{0.5, 0}}, {Deriv::xx}), CapabilityError);
  CHECK_NOTHROW(evaluate(m, th, {Point{0.5, 0}}, {Deriv::v, Deriv::x}));
  CHECK_THROWS_AS(PdeProblem::poisson1d().check_model(m), CapabilityError);
}

TEST_CASE("parameter snapshots round-trip bit-exactly") {
  const MlpModel m(MlpSpec{2, {3}, {}, 2});
  const ParameterVector th = xavier_init(m, 1.0, 17);
  const std::string path = "snapshot_roundtrip.bin";
  write_snapshot(path, th);
  const ParameterVector back = read_snapshot(path);
  std::remove(path.c_str());
  CHECK(back.hash() == th.hash());
  CHECK(back.layout().size() == th.layout().size());
  CHECK(back.layout()[2].name == th.layout()[2].name);
  const auto blocks = th.unpack();
  CHECK(ParameterVector::pack(th.layout(), blocks).hash() == th.hash());
  CHECK_THROWS_AS((void)th.offset_of("nope"), std::out_of_range);
}
