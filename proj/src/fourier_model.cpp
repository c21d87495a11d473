#include "piml/fourier_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "piml/errors.hpp"

namespace piml {

namespace {

// (value, first, second derivative) of the 1D basis function with signed
// index k at s.
std::array<double, 3> trig(int k, double s, double scale0, double scale) {
  if (k == 0) return {scale0, 0.0, 0.0};
  const double w = std::abs(k);
  const double c = std::cos(w * s);
  const double sn = std::sin(w * s);
  if (k < 0) return {scale * c, -scale * w * sn, -scale * w * w * c};
  return {scale * sn, scale * w * c, -scale * w * w * sn};
}

}  // namespace

FourierFeatureModel::FourierFeatureModel(FourierSpec spec) : spec_(spec) {
  if (spec_.k_max < 0 || spec_.kt_max < 0) throw ConfigError("Fourier frequencies must be nonnegative");
  n_params_ = static_cast<std::size_t>(2 * spec_.k_max + 1) * static_cast<std::size_t>(2 * spec_.kt_max + 1);
}

ParameterLayout FourierFeatureModel::layout() const {
  return {LayoutBlock{"theta", static_cast<std::size_t>(2 * spec_.k_max + 1),
                      static_cast<std::size_t>(2 * spec_.kt_max + 1)}};
}

std::string FourierFeatureModel::describe() const {
  std::ostringstream os;
  os << "fourier K=" << spec_.k_max << " M=" << spec_.kt_max
     << (spec_.normalized ? " normalized" : " raw")
     << " basis={1,cos(kx),sin(kx)}x{1,cos(mt),sin(mt)} t-period=2pi";
  return os.str();
}

int FourierFeatureModel::spatial_index(std::size_t i) const {
  return static_cast<int>(i / static_cast<std::size_t>(2 * spec_.kt_max + 1)) - spec_.k_max;
}

int FourierFeatureModel::temporal_index(std::size_t i) const {
  return static_cast<int>(i % static_cast<std::size_t>(2 * spec_.kt_max + 1)) - spec_.kt_max;
}

void FourierFeatureModel::basis(const Point& p, std::vector<Jet>& out) const {
  out.resize(n_params_);
  const double s0 = spec_.normalized ? 1.0 / std::sqrt(2.0 * std::numbers::pi) : 1.0;
  const double s1 = spec_.normalized ? 1.0 / std::sqrt(std::numbers::pi) : 1.0;
  const int nt = 2 * spec_.kt_max + 1;
  std::vector<std::array<double, 3>> tvals(nt);
  for (int m = 0; m < nt; ++m) tvals[m] = trig(m - spec_.kt_max, p.t, 1.0, 1.0);
  std::size_t i = 0;
  for (int j = 0; j < 2 * spec_.k_max + 1; ++j) {
    const auto a = trig(j - spec_.k_max, p.x, s0, s1);
    for (int m = 0; m < nt; ++m, ++i) {
      const auto& b = tvals[m];
      Jet& o = out[i];
      o.v() = a[0] * b[0];
      o.x() = a[1] * b[0];
      o.t() = a[0] * b[1];
      o.xx() = a[2] * b[0];
      o.xt() = a[1] * b[1];
      o.tt() = a[0] * b[2];
    }
  }
}

}  // namespace piml
