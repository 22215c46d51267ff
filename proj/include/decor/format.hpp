#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace decor {

/// Shortest round-trip decimal form of a double (capped at 17 significant
/// digits). Used everywhere a float enters a report, so that identical runs
/// produce byte-identical output.
inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string fmt_complex(std::complex<double> z) {
  std::string s = fmt_double(z.real());
  if (z.imag() >= 0 || std::isnan(z.imag()))
    s += "+" + fmt_double(z.imag()) + "i";
  else
    s += fmt_double(z.imag()) + "i";
  return s;
}

} // namespace decor
