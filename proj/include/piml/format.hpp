#ifndef PIML_FORMAT_HPP_
#define PIML_FORMAT_HPP_

#include <charconv>
#include <cmath>
#include <string>

namespace piml {

// Shortest decimal string that parses back to the same double. Infinities
// print as "inf"/"-inf", NaN as "nan".
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace piml

#endif  // PIML_FORMAT_HPP_
