#ifndef PIML_MLP_MODEL_HPP_
#define PIML_MLP_MODEL_HPP_

#include <cstdint>

#include "piml/model.hpp"

namespace piml {

struct MlpSpec {
  int inputs = 2;            // 1: u(x), 2: u(x, t)
  std::vector<int> hidden{32, 32};
  Vector input_scale;        // per-input factors alpha; empty means 1
  int order = 2;             // highest derivative order carried through the jets
};

// tanh multilayer perceptron with scalar output.
// Blocks: W0 (h1 x in), b0 (h1), W1 (h2 x h1), b1, ..., W_L (1 x h_L), b_L (1).
class MlpModel : public Model {
 public:
  explicit MlpModel(MlpSpec spec);

  std::string name() const override { return "mlp"; }
  ParameterLayout layout() const override { return layout_; }
  std::size_t num_params() const override { return n_params_; }
  std::string describe() const override;
  int max_order() const override { return spec_.order; }

  Jet forward(std::span<const double> theta, const Point& p) const override;
  Jet backward(std::span<const double> theta, const Point& p, const Jet& cot,
               std::span<double> grad) const override;

  const MlpSpec& spec() const { return spec_; }
  // Layer fan-in and fan-out of affine map k (0 .. hidden.size()).
  int fan_in(std::size_t k) const;
  int fan_out(std::size_t k) const;
  std::size_t weight_offset(std::size_t k) const { return w_off_[k]; }
  std::size_t bias_offset(std::size_t k) const { return b_off_[k]; }
  std::size_t num_layers() const { return spec_.hidden.size() + 1; }

 private:
  MlpSpec spec_;
  ParameterLayout layout_;
  std::vector<std::size_t> w_off_, b_off_;
  std::size_t n_params_ = 0;
  int ncomp_ = kJetSize;  // jet components actually propagated
};

// Xavier initialization: weights of layer k drawn from
// N(0, 2 g^2 / (d_{k-1} + d_k)), biases zero.
ParameterVector xavier_init(const MlpModel& model, double gain, std::uint64_t seed);

}  // namespace piml

#endif  // PIML_MLP_MODEL_HPP_
