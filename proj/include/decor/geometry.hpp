#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "decor/common.hpp"

namespace decor {

using Polyline = std::vector<cplx>;

inline double dist(cplx a, cplx b) { return std::abs(a - b); }

inline double polyline_length(const Polyline& p) {
  double s = 0;
  for (size_t i = 1; i < p.size(); ++i) s += dist(p[i - 1], p[i]);
  return s;
}

inline std::pair<cplx, cplx> bounding_box(const Polyline& p) {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (auto z : p) {
    xlo = std::min(xlo, z.real());
    xhi = std::max(xhi, z.real());
    ylo = std::min(ylo, z.imag());
    yhi = std::max(yhi, z.imag());
  }
  return {cplx(xlo, ylo), cplx(xhi, yhi)};
}

inline double diameter_estimate(const Polyline& p) {
  auto [lo, hi] = bounding_box(p);
  return std::abs(hi - lo);
}

/// Winding number of a closed polyline around z (sum of turned angles).
/// Robust enough away from the curve; callers guard with distance checks.
inline double winding_number(const Polyline& poly, cplx z) {
  double total = 0;
  size_t n = poly.size();
  if (n < 3) return 0;
  for (size_t i = 0; i < n; ++i) {
    cplx a = poly[i] - z;
    cplx b = poly[(i + 1) % n] - z;
    total += std::arg(b / a);
  }
  return total / kTwoPi;
}

/// Distance from z to the polyline (segments, not just vertices).
inline double distance_to_polyline(const Polyline& poly, cplx z, bool closed = true) {
  double best = 1e300;
  size_t n = poly.size();
  if (n == 0) return best;
  if (n == 1) return dist(poly[0], z);
  size_t m = closed ? n : n - 1;
  for (size_t i = 0; i < m; ++i) {
    cplx a = poly[i], b = poly[(i + 1) % n];
    cplx ab = b - a;
    double len2 = std::norm(ab);
    double t = len2 > 0 ? std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, dist(z, a + t * ab));
  }
  return best;
}

/// One-sided Hausdorff distance from samples of a to polyline b.
inline double hausdorff_one_sided(const Polyline& a, const Polyline& b, bool closed = true) {
  double worst = 0;
  for (auto z : a) worst = std::max(worst, distance_to_polyline(b, z, closed));
  return worst;
}

inline double hausdorff(const Polyline& a, const Polyline& b, bool closed = true) {
  return std::max(hausdorff_one_sided(a, b, closed), hausdorff_one_sided(b, a, closed));
}

enum class Location { inside, outside, on_boundary };

/// Point location against a closed curve with an explicit tolerance band.
/// "on boundary" is a first-class result, never silently resolved.
inline Location locate_point(const Polyline& poly, cplx z, double band) {
  if (distance_to_polyline(poly, z, true) <= band) return Location::on_boundary;
  double w = winding_number(poly, z);
  return std::abs(w) > 0.5 ? Location::inside : Location::outside;
}

} // namespace decor
