#ifndef PIML_FOURIER_MODEL_HPP_
#define PIML_FOURIER_MODEL_HPP_

#include "piml/model.hpp"

namespace piml {

struct FourierSpec {
  int k_max = 1;         // spatial frequencies -K..K
  int kt_max = 0;        // temporal frequencies -M..M; 0 gives a stationary model
  bool normalized = true;  // 1/sqrt(2 pi), cos/sqrt(pi), sin/sqrt(pi); otherwise 1, cos, sin
};

// Fourier-feature linear model. Parameter i = j * (2M + 1) + m pairs the
// spatial index j (frequency k = j - K: cos(|k|x) for k < 0, constant for
// k = 0, sin(kx) for k > 0) with the temporal index m of the analogous
// basis 1, cos(mt), sin(mt) in t (period 2 pi).
class FourierFeatureModel : public LinearModel {
 public:
  explicit FourierFeatureModel(FourierSpec spec);

  std::string name() const override { return "fourier"; }
  ParameterLayout layout() const override;
  std::size_t num_params() const override { return n_params_; }
  std::string describe() const override;
  void basis(const Point& p, std::vector<Jet>& out) const override;

  const FourierSpec& spec() const { return spec_; }
  // Signed spatial index k of parameter i.
  int spatial_index(std::size_t i) const;
  int temporal_index(std::size_t i) const;

 private:
  FourierSpec spec_;
  std::size_t n_params_;
};

}  // namespace piml

#endif  // PIML_FOURIER_MODEL_HPP_
