#pragma once

#include "decor/grid.hpp"

namespace decor {
namespace fixtures {

inline Polyline circle(cplx center, double r, int n = 512) {
  Polyline p;
  p.reserve(n);
  for (int i = 0; i < n; ++i) p.push_back(center + std::polar(r, kTwoPi * i / n));
  return p;
}

inline Polyline rectangle(double x0, double y0, double x1, double y1) {
  return {cplx(x0, y0), cplx(x1, y0), cplx(x1, y1), cplx(x0, y1)};
}

/// Round annulus r < |z| < R, solved in the log-polar chart.
inline DomainBuilder round_annulus(double r, double R) {
  if (!(0 < r && r < R)) fail_pre("round_annulus: need 0 < r < R");
  return [r, R](int cells) {
    return make_annulus_domain(circle(0, R), circle(0, r), Chart::logpolar, 0, cells);
  };
}

/// Concentric square frame (side ratio outer/inner), Cartesian chart.
inline DomainBuilder square_frame(double inner_half, double outer_half) {
  return [inner_half, outer_half](int cells) {
    Polyline outer = rectangle(-outer_half, -outer_half, outer_half, outer_half);
    Polyline inner = rectangle(-inner_half, -inner_half, inner_half, inner_half);
    return make_annulus_domain(outer, inner, Chart::cartesian, 0, cells);
  };
}

/// a x h rectangle; side-a and side-b are the two length-a edges, so the
/// expected extremal distance is h/a.
inline DomainBuilder rect_quad(double a, double h) {
  return [a, h](int cells) {
    Polyline poly = rectangle(0, 0, a, h);
    Polyline bottom = {cplx(0, 0), cplx(a, 0)};
    Polyline top = {cplx(0, h), cplx(a, h)};
    return make_quad_domain(poly, bottom, top, cells);
  };
}

/// Truncated strip Pi(h): base interval (0, a) on the real axis, full top
/// edge at height h, free vertical ends `pad_h` beyond the interval.
inline DomainBuilder strip_quad(double h, double a, double pad_factor = 10.0) {
  return [h, a, pad_factor](int cells) {
    double W = pad_factor * h;
    Polyline poly = rectangle(-W, 0, a + W, h);
    Polyline base = {cplx(0, 0), cplx(a, 0)};
    Polyline top = {cplx(-W, h), cplx(a + W, h)};
    return make_quad_domain(poly, base, top, cells);
  };
}

/// L-shaped hexagon with the marked sides on the two end edges.
inline DomainBuilder l_shape_quad(bool swapped = false) {
  // vertices of an L: legs 2 x 1
  Polyline poly = {cplx(0, 0), cplx(2, 0), cplx(2, 1), cplx(1, 1), cplx(1, 2), cplx(0, 2)};
  Polyline end_a = {cplx(2, 0), cplx(2, 1)};   // right end edge
  Polyline end_b = {cplx(0, 2), cplx(1, 2)};   // top end edge
  Polyline side1 = {cplx(0, 0), cplx(2, 0)};   // conjugate pair of sides:
  Polyline side2 = {cplx(2, 1), cplx(1, 1), cplx(1, 2)}; // outer and inner corner paths
  if (!swapped)
    return [=](int cells) { return make_quad_domain(poly, end_a, end_b, cells); };
  return [=](int cells) { return make_quad_domain(poly, side1, side2, cells); };
}

/// Affine image a*z + b of a domain builder's polylines (conformal
/// invariance fixture).
inline Polyline affine(const Polyline& p, cplx a, cplx b) {
  Polyline out;
  out.reserve(p.size());
  for (auto z : p) out.push_back(a * z + b);
  return out;
}

/// Full preimage of a closed curve (winding once around 0) under z -> z^N:
/// one closed curve that traverses the source N times.
inline Polyline radical_preimage(const Polyline& curve, int N) {
  const size_t m = curve.size();
  // continuous angle along one traversal
  std::vector<double> theta(m);
  theta[0] = std::arg(curve[0]);
  for (size_t i = 1; i < m; ++i) {
    double a = std::arg(curve[i]);
    double prev = theta[i - 1];
    while (a - prev > kPi) a -= kTwoPi;
    while (a - prev < -kPi) a += kTwoPi;
    theta[i] = a;
  }
  Polyline out;
  out.reserve(m * N);
  for (int t = 0; t < N; ++t)
    for (size_t i = 0; i < m; ++i)
      out.push_back(std::polar(std::pow(std::abs(curve[i]), 1.0 / N),
                               (theta[i] + kTwoPi * t) / N));
  return out;
}

} // namespace fixtures
} // namespace decor
