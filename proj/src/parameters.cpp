#include "piml/parameters.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "piml/errors.hpp"
#include "piml/format.hpp"

namespace piml {

std::size_t layout_size(const ParameterLayout& layout) {
  std::size_t n = 0;
  for (const auto& b : layout) n += b.size();
  return n;
}

ParameterVector::ParameterVector(ParameterLayout layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (layout_size(layout_) != values_.size())
    throw ContractViolation("parameter layout size does not match value count");
}

ParameterVector::ParameterVector(ParameterLayout layout)
    : layout_(std::move(layout)), values_(layout_size(layout_), 0.0) {}

std::vector<Vector> ParameterVector::unpack() const {
  std::vector<Vector> out;
  std::size_t off = 0;
  for (const auto& b : layout_) {
    out.emplace_back(values_.begin() + off, values_.begin() + off + b.size());
    off += b.size();
  }
  return out;
}

ParameterVector ParameterVector::pack(const ParameterLayout& layout, const std::vector<Vector>& blocks) {
  if (blocks.size() != layout.size()) throw ContractViolation("block count does not match layout");
  Vector values;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].size() != layout[i].size()) throw ContractViolation("block '" + layout[i].name + "' has wrong size");
    values.insert(values.end(), blocks[i].begin(), blocks[i].end());
  }
  return ParameterVector(layout, std::move(values));
}

std::size_t ParameterVector::offset_of(const std::string& name) const {
  std::size_t off = 0;
  for (const auto& b : layout_) {
    if (b.name == name) return off;
    off += b.size();
  }
  throw std::out_of_range("no parameter block named '" + name + "'");
}

std::uint64_t ParameterVector::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : values_) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("truncated parameter snapshot");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr char kMagic[8] = {'P', 'I', 'M', 'L', 'T', 'H', 'T', '1'};

}  // namespace

void write_snapshot(const std::string& path, const ParameterVector& theta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write snapshot " + path);
  os.write(kMagic, 8);
  put_u64(os, theta.layout().size());
  for (const auto& b : theta.layout()) {
    put_u64(os, b.name.size());
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    put_u64(os, b.rows);
    put_u64(os, b.cols);
  }
  put_u64(os, theta.size());
  for (double v : theta.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
  }
}

ParameterVector read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read snapshot " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("not a parameter snapshot: " + path);
  ParameterLayout layout(get_u64(is));
  for (auto& b : layout) {
    b.name.resize(get_u64(is));
    is.read(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    b.rows = get_u64(is);
    b.cols = get_u64(is);
  }
  Vector values(get_u64(is));
  for (double& v : values) {
    const std::uint64_t bits = get_u64(is);
    std::memcpy(&v, &bits, 8);
  }
  return ParameterVector(std::move(layout), std::move(values));
}

void write_snapshot_csv(const std::string& path, const ParameterVector& theta) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write snapshot " + path);
  os << "block,row,col,value\n";
  std::size_t off = 0;
  for (const auto& b : theta.layout()) {
    for (std::size_t r = 0; r < b.rows; ++r)
      for (std::size_t c = 0; c < b.cols; ++c)
        os << b.name << ',' << r << ',' << c << ',' << format_double(theta[off + r * b.cols + c]) << '\n';
    off += b.size();
  }
}

}  // namespace piml
