#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "decor/common.hpp"
#include "decor/config.hpp"

namespace decor {

struct GreenResult {
  double value = 0;            // lim 2^{-n} log^+ |f^n z|
  bool below_resolution = false; // budget exhausted without escape
  int iterations = 0;
};

/// The quadratic polynomial f(z) = z^2 + c with its two fixed points.
/// beta = (1 + sqrt(1-4c))/2 (principal branch) is the landing point of the
/// 0-ray; alpha = 1 - beta is the dividing fixed point.
class QuadraticMap {
public:
  explicit QuadraticMap(cplx c) : c_(c) {
    cplx s = std::sqrt(cplx(1.0, 0.0) - 4.0 * c);
    beta_ = (cplx(1.0, 0.0) + s) / 2.0;
    alpha_ = cplx(1.0, 0.0) - beta_;
    escape_radius_ = std::max(2.0 + std::abs(c_), 4.0);
  }

  cplx c() const { return c_; }
  cplx alpha() const { return alpha_; }
  cplx beta() const { return beta_; }
  double escape_radius() const { return escape_radius_; }

  cplx apply(cplx z) const { return z * z + c_; }

  cplx iterate(cplx z, long n) const {
    for (long i = 0; i < n; ++i) z = z * z + c_;
    return z;
  }

  /// |f'(alpha)| > 1 test; parabolic/attracting alpha is excluded by most
  /// puzzle preconditions.
  bool alpha_repelling() const { return std::abs(2.0 * alpha_) > 1.0 + 1e-12; }

  /// [0, c, c^2+c, ...], n+1 entries; truncates with escaped=true past the
  /// escape radius.
  std::vector<cplx> critical_orbit(long n, bool* escaped = nullptr) const {
    std::vector<cplx> orb;
    orb.reserve(static_cast<size_t>(n) + 1);
    cplx z = 0;
    if (escaped) *escaped = false;
    for (long i = 0; i <= n; ++i) {
      orb.push_back(z);
      if (std::abs(z) > escape_radius_) {
        if (escaped) *escaped = true;
        break;
      }
      z = z * z + c_;
    }
    return orb;
  }

  GreenResult green(cplx z, int budget = 10000) const {
    return extended_ ? green_t<long double>(z, budget) : green_t<double>(z, budget);
  }

  void set_extended_precision(bool on) { extended_ = on; }
  bool extended_precision() const { return extended_; }

private:
  template <class T>
  GreenResult green_t(cplx z0, int budget) const {
    using C = std::complex<T>;
    C z(static_cast<T>(z0.real()), static_cast<T>(z0.imag()));
    C c(static_cast<T>(c_.real()), static_cast<T>(c_.imag()));
    const T far = static_cast<T>(1e150);
    GreenResult g;
    for (int n = 0; n <= budget; ++n) {
      T az = std::abs(z);
      if (az > far) {
        g.value = static_cast<double>(std::ldexp(static_cast<double>(std::log(az)), -n));
        g.iterations = n;
        return g;
      }
      z = z * z + c;
    }
    g.below_resolution = true;
    g.iterations = budget;
    return g;
  }

  cplx c_;
  cplx alpha_, beta_;
  double escape_radius_;
  bool extended_ = false;
};

} // namespace decor
