#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "decor/common.hpp"
#include "decor/format.hpp"

namespace decor {

/// Nonnegative extended real with an error bar; the value algebra follows
/// the harmonic-sum conventions 0^{-1} = inf, inf^{-1} = 0.
struct Modulus {
  double value = 0;
  double error = 0; // half-width from grid refinement; 0 for exact inputs
  bool infinite = false;

  static Modulus exact(double v) { return Modulus{v, 0, false}; }
  static Modulus inf() { return Modulus{0, 0, true}; }

  double lo() const { return infinite ? std::numeric_limits<double>::infinity() : value - error; }
  double hi() const { return infinite ? std::numeric_limits<double>::infinity() : value + error; }

  std::string str() const {
    if (infinite) return "inf";
    return fmt_double(value) + (error > 0 ? " +- " + fmt_double(error) : "");
  }
};

/// x (+) y = (x^{-1} + y^{-1})^{-1}.
inline Modulus harmonic_sum(const Modulus& x, const Modulus& y) {
  if (x.infinite) return y;
  if (y.infinite) return x;
  if (x.value <= 0 || y.value <= 0) return Modulus::exact(0);
  double v = 1.0 / (1.0 / x.value + 1.0 / y.value);
  // first-order error propagation: d(v)/d(x) = (v/x)^2
  double err = sqr(v / x.value) * x.error + sqr(v / y.value) * y.error;
  return Modulus{v, err, false};
}

/// Signed extended real: the harmonic difference can leave the nonnegative
/// cone (x < y gives a negative value; x = y gives infinity, flagged).
struct HarmonicDiff {
  double value = 0;
  double error = 0;
  bool infinite = false;
  bool degenerate = false; // x == y (or both infinite): flagged by convention
};

/// x (-) y = (x^{-1} - y^{-1})^{-1} with 0^{-1} = inf, inf^{-1} = 0.
inline HarmonicDiff harmonic_diff(const Modulus& x, const Modulus& y) {
  HarmonicDiff out;
  if (x.infinite && y.infinite) {
    out.infinite = true;
    out.degenerate = true;
    return out;
  }
  if (x.infinite) { // (0 - 1/y)^{-1} = -y
    out.value = -y.value;
    out.error = y.error;
    return out;
  }
  if (y.infinite) {
    out.value = x.value;
    out.error = x.error;
    return out;
  }
  if (x.value == y.value) {
    out.infinite = true;
    out.degenerate = true;
    return out;
  }
  double v = 1.0 / (1.0 / x.value - 1.0 / y.value);
  out.value = v;
  out.error = sqr(v / x.value) * x.error + sqr(v / y.value) * y.error;
  return out;
}

enum class LawMode { width, length };

/// Parallel Law: widths add; lengths combine by harmonic sum.
inline Modulus parallel_law(const std::vector<Modulus>& values, LawMode mode) {
  if (values.empty()) fail_pre("parallel_law: empty list");
  if (mode == LawMode::width) {
    Modulus acc = Modulus::exact(0);
    for (auto& v : values) {
      if (v.infinite) return Modulus::inf();
      acc.value += v.value;
      acc.error += v.error;
    }
    return acc;
  }
  Modulus acc = values[0];
  for (size_t i = 1; i < values.size(); ++i) acc = harmonic_sum(acc, values[i]);
  return acc;
}

/// Series Law: lengths (extremal distances) add.
inline Modulus series_law(const std::vector<Modulus>& values) {
  if (values.empty()) fail_pre("series_law: empty list");
  Modulus acc = Modulus::exact(0);
  for (auto& v : values) {
    if (v.infinite) return Modulus::inf();
    acc.value += v.value;
    acc.error += v.error;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Verdicts for the quantitative appendix laws.

enum class VerdictStatus { pass, fail, inconclusive };

inline const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct InequalityVerdict {
  std::string name;
  double lhs = 0, rhs = 0;
  double lhs_err = 0, rhs_err = 0;
  VerdictStatus status = VerdictStatus::inconclusive;
  double slack = 0; // rhs - lhs (how comfortably the inequality holds)
  std::string note;
};

/// Status of "lhs <= rhs" with error bars folded in: pass only when the
/// bars cannot straddle the inequality.
inline InequalityVerdict check_leq(const std::string& name, double lhs, double lhs_err, double rhs,
                                   double rhs_err, const std::string& note = "") {
  InequalityVerdict v;
  v.name = name;
  v.lhs = lhs;
  v.rhs = rhs;
  v.lhs_err = lhs_err;
  v.rhs_err = rhs_err;
  v.slack = rhs - lhs;
  v.note = note;
  if (lhs + lhs_err <= rhs - rhs_err)
    v.status = VerdictStatus::pass;
  else if (lhs - lhs_err > rhs + rhs_err)
    v.status = VerdictStatus::fail;
  else
    v.status = VerdictStatus::inconclusive;
  return v;
}

/// Strip bounds h/2a <= mod <= h/a (valid under the proviso h/a <= 1/2; the
/// alternative hypothesis "mod <= 1/4" is not exercised here).
inline InequalityVerdict check_pi_bounds(double h, double a, const Modulus& computed) {
  if (!(h > 0 && a > 0)) fail_pre("check_pi_bounds: h, a must be positive");
  if (h / a > 0.5) fail_pre("check_pi_bounds: proviso h/a <= 1/2 violated");
  InequalityVerdict lowr = check_leq("pi-lower", h / (2 * a), 0, computed.value, computed.error);
  InequalityVerdict uppr = check_leq("pi-upper", computed.value, computed.error, h / a, 0);
  InequalityVerdict v;
  v.name = "pi-bounds";
  v.lhs = computed.value;
  v.lhs_err = computed.error;
  v.rhs = h / a;
  v.note = "interval [" + fmt_double(h / (2 * a)) + ", " + fmt_double(h / a) + "]";
  if (lowr.status == VerdictStatus::pass && uppr.status == VerdictStatus::pass)
    v.status = VerdictStatus::pass;
  else if (lowr.status == VerdictStatus::fail || uppr.status == VerdictStatus::fail)
    v.status = VerdictStatus::fail;
  else
    v.status = VerdictStatus::inconclusive;
  v.slack = std::min(computed.value - h / (2 * a), h / a - computed.value);
  return v;
}

/// Cylinder bound: mod(strip) >= min(mod(cylinder), 0.5)/2.
inline InequalityVerdict check_cylinder_bound(const Modulus& mod_strip, const Modulus& mod_cyl) {
  double bound = 0.5 * std::min(mod_cyl.value, 0.5);
  double bound_err = mod_cyl.value < 0.5 ? 0.5 * mod_cyl.error : 0.0;
  InequalityVerdict v =
      check_leq("cylinder-bound", bound, bound_err, mod_strip.value, mod_strip.error);
  v.name = "cylinder-bound";
  return v;
}

/// Holomorphic vs embedded annulus: mod_hol <= 16 mod_emb.
inline InequalityVerdict check_groetzsch16(const Modulus& mod_hol, const Modulus& mod_emb) {
  InequalityVerdict v = check_leq("groetzsch-16", mod_hol.value, mod_hol.error,
                                  16.0 * mod_emb.value, 16.0 * mod_emb.error);
  v.name = "groetzsch-16";
  return v;
}

} // namespace decor
