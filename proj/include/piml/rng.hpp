#ifndef PIML_RNG_HPP_
#define PIML_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace piml {

// Seedable 64-bit generator. Independent substreams are derived from a base
// seed and a stream label so that e.g. interior and boundary draws of the same
// run never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  Rng substream(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }
  Rng substream(std::string_view label) const { return substream(hash_label(label)); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
  static std::uint64_t hash_label(std::string_view label);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace piml

#endif  // PIML_RNG_HPP_
