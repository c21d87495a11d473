#ifndef PIML_PARAMETERS_HPP_
#define PIML_PARAMETERS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "piml/linalg.hpp"

namespace piml {

struct LayoutBlock {
  std::string name;
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t size() const { return rows * cols; }
};

using ParameterLayout = std::vector<LayoutBlock>;

std::size_t layout_size(const ParameterLayout& layout);

// Flat parameter vector with named blocks. The layout is metadata only;
// optimizers see the flat values.
class ParameterVector {
 public:
  ParameterVector() = default;
  ParameterVector(ParameterLayout layout, Vector values);
  explicit ParameterVector(ParameterLayout layout);

  std::size_t size() const { return values_.size(); }
  const ParameterLayout& layout() const { return layout_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  // Copies of individual blocks, and the inverse operation.
  std::vector<Vector> unpack() const;
  static ParameterVector pack(const ParameterLayout& layout, const std::vector<Vector>& blocks);

  // Offset of the named block; throws std::out_of_range for unknown names.
  std::size_t offset_of(const std::string& name) const;

  // FNV-1a over the raw bytes; used as a snapshot fingerprint.
  std::uint64_t hash() const;

 private:
  ParameterLayout layout_;
  Vector values_;
};

// Binary snapshot:
//   magic "PIMLTHT1" (8 bytes)
//   u64 block count B
//   B times: u64 name length, name bytes, u64 rows, u64 cols
//   u64 value count n, then n little-endian IEEE-754 doubles
void write_snapshot(const std::string& path, const ParameterVector& theta);
ParameterVector read_snapshot(const std::string& path);

// CSV snapshot: header "block,row,col,value", one line per entry.
void write_snapshot_csv(const std::string& path, const ParameterVector& theta);

}  // namespace piml

#endif  // PIML_PARAMETERS_HPP_
