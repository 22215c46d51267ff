#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "decor/geometry.hpp"
#include "decor/modulus.hpp"
#include "decor/config.hpp"

namespace decor {

enum class GridMode { annulus, quad };
enum class Chart { cartesian, logpolar };

/// Rasterized planar region with labeled boundary cells. Cell types: 0 =
/// outside (free/Neumann across the edge), 1 = interior unknown, 2 =
/// Dirichlet 0 (inner / side-a), 3 = Dirichlet 1 (outer / side-b).
struct GridDomain {
  GridMode mode = GridMode::annulus;
  Chart chart = Chart::cartesian;
  cplx center;          // log-polar center in the z-plane
  int nx = 0, ny = 0;   // cells
  double x0 = 0, y0 = 0, hx = 0, hy = 0; // chart window: cell (i,j) center = (x0+(i+.5)hx, y0+(j+.5)hy)
  bool periodic_y = false;
  std::vector<std::uint8_t> cell;

  std::uint8_t at(int i, int j) const { return cell[size_t(j) * nx + i]; }
  std::uint8_t& at(int i, int j) { return cell[size_t(j) * nx + i]; }
  // edge weights of the anisotropic 5-point energy
  double wx() const { return hy / hx; }
  double wy() const { return hx / hy; }
};

namespace griddetail {

/// Chart image of a z-plane polyline. Log-polar: (log|z-center|, arg),
/// with the angle unwrapped continuously along the curve.
inline Polyline to_chart(const Polyline& poly, Chart chart, cplx center) {
  if (chart == Chart::cartesian) return poly;
  Polyline out;
  out.reserve(poly.size());
  double prev_arg = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    cplx d = poly[i] - center;
    double r = std::abs(d);
    if (r <= 0) fail_pre("log-polar chart: polyline passes through the center");
    double a = std::arg(d);
    if (i > 0) {
      while (a - prev_arg > kPi) a -= kTwoPi;
      while (a - prev_arg < -kPi) a += kTwoPi;
    }
    prev_arg = a;
    out.emplace_back(std::log(r), a);
  }
  return out;
}

/// Per-column crossing lists of a closed chart polyline with the vertical
/// line x = const. In the periodic chart the crossing test runs modulo 2pi
/// in y, which is handled by the caller feeding unwrapped edges.
struct ColumnCrossings {
  std::vector<std::vector<double>> ys; // per column, unsorted crossing y's
};

inline ColumnCrossings crossings(const Polyline& chart_poly, const GridDomain& g, bool wrap_y) {
  ColumnCrossings cc;
  cc.ys.resize(g.nx);
  size_t n = chart_poly.size();
  for (size_t e = 0; e < n; ++e) {
    cplx p = chart_poly[e], q = chart_poly[(e + 1) % n];
    if (wrap_y) {
      // vertical line in chart x; here "column" axis is x, crossing records y
    }
    double xa = p.real(), xb = q.real();
    if (xa == xb) continue;
    int i_lo = static_cast<int>(std::ceil((std::min(xa, xb) - g.x0) / g.hx - 0.5));
    int i_hi = static_cast<int>(std::floor((std::max(xa, xb) - g.x0) / g.hx - 0.5));
    for (int i = std::max(0, i_lo); i <= std::min(g.nx - 1, i_hi); ++i) {
      double x = g.x0 + (i + 0.5) * g.hx;
      if ((xa <= x && x < xb) || (xb <= x && x < xa)) {
        double t = (x - xa) / (xb - xa);
        cc.ys[i].push_back(p.imag() + t * (q.imag() - p.imag()));
      }
    }
  }
  return cc;
}

/// Even-odd test against precomputed column crossings: for Cartesian, count
/// crossings above the point; for periodic-y (log-polar with column = phi
/// direction) the roles of x and y are swapped by construction below.
inline bool inside_column(const std::vector<double>& ys, double y) {
  int cnt = 0;
  for (double c : ys)
    if (c > y) ++cnt;
  return cnt % 2 == 1;
}

/// Log-polar crossing of the radial line arg = phi with a chart polyline
/// (x = rho, y = unwrapped phi): collect rho values where the curve crosses
/// phi + 2 pi k.
inline std::vector<std::vector<double>> radial_crossings(const Polyline& chart_poly,
                                                         const GridDomain& g) {
  std::vector<std::vector<double>> per_col(g.ny);
  size_t n = chart_poly.size();
  for (size_t e = 0; e < n; ++e) {
    cplx p = chart_poly[e], q = chart_poly[(e + 1) % n];
    if (e + 1 == n) {
      // closing edge: continue the unwrap instead of jumping back
      double dy = q.imag() - p.imag();
      dy -= kTwoPi * std::round(dy / kTwoPi);
      q = cplx(q.real(), p.imag() + dy);
    }
    double ya = p.imag(), yb = q.imag();
    if (ya == yb) continue;
    double ylo = std::min(ya, yb), yhi = std::max(ya, yb);
    // all grid angles phi_j + 2 pi k inside [ylo, yhi)
    for (int k = static_cast<int>(std::floor((ylo - g.y0) / kTwoPi)) - 1;
         k <= static_cast<int>(std::ceil((yhi - g.y0) / kTwoPi)) + 1; ++k) {
      for (int j = 0; j < g.ny; ++j) {
        double phi = g.y0 + (j + 0.5) * g.hy + kTwoPi * k;
        if ((ya <= phi && phi < yb) || (yb <= phi && phi < ya)) {
          double t = (phi - ya) / (yb - ya);
          per_col[j].push_back(p.real() + t * (q.real() - p.real()));
        }
      }
    }
  }
  return per_col;
}

} // namespace griddetail

// ---------------------------------------------------------------------------
// Domain construction.

/// Annulus-mode domain between two closed curves (inner inside outer). The
/// log-polar chart resolves extreme radius ratios; the chart window aligns
/// the extreme boundary values with cell edges.
inline GridDomain make_annulus_domain(const Polyline& outer, const Polyline& inner, Chart chart,
                                      cplx center, int cells) {
  if (outer.size() < 3 || inner.size() < 3) fail_pre("annulus domain: degenerate boundary");
  GridDomain g;
  g.mode = GridMode::annulus;
  g.chart = chart;
  g.center = center;

  Polyline co = griddetail::to_chart(outer, chart, center);
  Polyline ci = griddetail::to_chart(inner, chart, center);

  if (chart == Chart::logpolar) {
    double rlo = 1e300, rhi = -1e300;
    for (auto p : ci) rlo = std::min(rlo, p.real());
    for (auto p : co) rhi = std::max(rhi, p.real());
    for (auto p : ci) rhi = std::max(rhi, p.real());
    for (auto p : co) rlo = std::min(rlo, p.real());
    double span = rhi - rlo;
    if (!(span > 0)) fail_pre("annulus domain: inner does not separate from outer");
    g.periodic_y = true;
    g.y0 = -kPi;
    if (span >= kTwoPi) {
      g.nx = cells;
      g.hx = span / g.nx;
      g.ny = std::max(8, static_cast<int>(std::lround(kTwoPi / g.hx)));
    } else {
      g.ny = cells;
      g.ny = std::max(g.ny, 8);
      g.hy = kTwoPi / g.ny;
      g.nx = std::max(4, static_cast<int>(std::lround(span / g.hy)));
    }
    g.hy = kTwoPi / g.ny;
    g.hx = span / g.nx;
    // one ghost column each side so the Dirichlet data has cells to live on
    // (the effective boundary then sits exactly on the cell edge)
    g.x0 = rlo - g.hx;
    g.nx += 2;
    g.cell.assign(size_t(g.nx) * g.ny, 0);

    auto cr_o = griddetail::radial_crossings(co, g);
    auto cr_i = griddetail::radial_crossings(ci, g);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        double rho = g.x0 + (i + 0.5) * g.hx;
        bool in_o = griddetail::inside_column(cr_o[j], rho);
        bool in_i = griddetail::inside_column(cr_i[j], rho);
        if (in_o && !in_i)
          g.at(i, j) = 1;
        else if (in_i)
          g.at(i, j) = 2;
        else
          g.at(i, j) = 3;
      }
    }
  } else {
    auto [lo, hi] = bounding_box(outer);
    double spanx = hi.real() - lo.real(), spany = hi.imag() - lo.imag();
    double h = std::max(spanx, spany) / cells;
    g.nx = std::max(4, static_cast<int>(std::lround(spanx / h)));
    g.ny = std::max(4, static_cast<int>(std::lround(spany / h)));
    g.hx = spanx / g.nx;
    g.hy = spany / g.ny;
    g.x0 = lo.real() - g.hx;
    g.y0 = lo.imag() - g.hy;
    g.nx += 2;
    g.ny += 2;
    g.cell.assign(size_t(g.nx) * g.ny, 0);
    auto cr_o = griddetail::crossings(co, g, false);
    auto cr_i = griddetail::crossings(ci, g, false);
    for (int i = 0; i < g.nx; ++i) {
      std::sort(cr_o.ys[i].begin(), cr_o.ys[i].end());
      std::sort(cr_i.ys[i].begin(), cr_i.ys[i].end());
      for (int j = 0; j < g.ny; ++j) {
        double y = g.y0 + (j + 0.5) * g.hy;
        bool in_o = griddetail::inside_column(cr_o.ys[i], y);
        bool in_i = griddetail::inside_column(cr_i.ys[i], y);
        if (in_o && !in_i)
          g.at(i, j) = 1;
        else if (in_i)
          g.at(i, j) = 2;
        else
          g.at(i, j) = 3;
      }
    }
  }
  return g;
}

/// Quadrilateral-mode domain: polygon interior with side-a / side-b painted
/// onto adjacent outside cells within a half-cell tolerance; the remaining
/// boundary is free (Neumann).
inline GridDomain make_quad_domain(const Polyline& polygon, const Polyline& side_a,
                                   const Polyline& side_b, int cells) {
  GridDomain g;
  g.mode = GridMode::quad;
  g.chart = Chart::cartesian;
  auto [lo, hi] = bounding_box(polygon);
  double spanx = hi.real() - lo.real(), spany = hi.imag() - lo.imag();
  double h = std::max(spanx, spany) / cells;
  g.nx = std::max(4, static_cast<int>(std::lround(spanx / h)) + 2);
  g.ny = std::max(4, static_cast<int>(std::lround(spany / h)) + 2);
  g.hx = h;
  g.hy = h;
  g.x0 = lo.real() - h;
  g.y0 = lo.imag() - h;
  g.cell.assign(size_t(g.nx) * g.ny, 0);

  auto cr = griddetail::crossings(polygon, g, false);
  for (int i = 0; i < g.nx; ++i) {
    std::sort(cr.ys[i].begin(), cr.ys[i].end());
    for (int j = 0; j < g.ny; ++j) {
      double y = g.y0 + (j + 0.5) * g.hy;
      if (griddetail::inside_column(cr.ys[i], y)) g.at(i, j) = 1;
    }
  }
  // boundary labels on outside cells adjacent to the interior
  double tol = 0.75 * std::max(g.hx, g.hy);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.at(i, j) != 0) continue;
      bool adj = (i > 0 && g.at(i - 1, j) == 1) || (i + 1 < g.nx && g.at(i + 1, j) == 1) ||
                 (j > 0 && g.at(i, j - 1) == 1) || (j + 1 < g.ny && g.at(i, j + 1) == 1);
      if (!adj) continue;
      cplx zc(g.x0 + (i + 0.5) * g.hx, g.y0 + (j + 0.5) * g.hy);
      if (distance_to_polyline(side_a, zc, false) <= tol)
        g.at(i, j) = 2;
      else if (distance_to_polyline(side_b, zc, false) <= tol)
        g.at(i, j) = 3;
    }
  return g;
}

// ---------------------------------------------------------------------------
// Solver: 5-point energy, multigrid-accelerated with a CG safeguard;
// modulus = 1 / Dirichlet energy.

namespace griddetail {

struct Level {
  int nx, ny;
  bool periodic_y;
  double wx, wy;
  std::vector<std::uint8_t> type;
  std::vector<double> diag;

  std::uint8_t at(int i, int j) const { return type[size_t(j) * nx + i]; }
};

inline int wrap(int j, int n) { return j < 0 ? j + n : (j >= n ? j - n : j); }

/// A(u): weighted graph Laplacian on interior cells; Dirichlet neighbors add
/// to the diagonal (their values enter b), Neumann edges are absent.
struct Operator {
  const Level* lv;

  void build_diag(Level& L) const {
    L.diag.assign(L.type.size(), 0);
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        if (L.at(i, j) != 1) continue;
        double d = 0;
        auto look = [&](int ii, int jj, double w) {
          if (L.periodic_y) jj = wrap(jj, L.ny);
          if (ii < 0 || ii >= L.nx || jj < 0 || jj >= L.ny) return;
          std::uint8_t t = L.type[size_t(jj) * L.nx + ii];
          if (t == 1) d += w;
          else if (t != 0) d += 2 * w; // Dirichlet face at half-cell distance
        };
        look(i - 1, j, L.wx);
        look(i + 1, j, L.wx);
        look(i, j - 1, L.wy);
        look(i, j + 1, L.wy);
        L.diag[size_t(j) * L.nx + i] = d;
      }
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    const Level& L = *lv;
    out.assign(u.size(), 0.0);
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        size_t id = size_t(j) * L.nx + i;
        if (L.type[id] != 1) continue;
        double acc = L.diag[id] * u[id];
        auto look = [&](int ii, int jj, double w) {
          if (L.periodic_y) jj = wrap(jj, L.ny);
          if (ii < 0 || ii >= L.nx || jj < 0 || jj >= L.ny) return;
          size_t nid = size_t(jj) * L.nx + ii;
          if (L.type[nid] == 1) acc -= w * u[nid];
        };
        look(i - 1, j, L.wx);
        look(i + 1, j, L.wx);
        look(i, j - 1, L.wy);
        look(i, j + 1, L.wy);
        out[id] = acc;
      }
  }
};

inline void smooth(const Level& L, std::vector<double>& u, const std::vector<double>& b,
                   int sweeps, bool reverse = false) {
  // red-black Gauss-Seidel; reverse flips the color order (adjoint sweep)
  for (int s = 0; s < 2 * sweeps; ++s) {
    int color = reverse ? 1 - s % 2 : s % 2;
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        if (((i + j) & 1) != color) continue;
        size_t id = size_t(j) * L.nx + i;
        if (L.type[id] != 1 || L.diag[id] <= 0) continue;
        double acc = b[id];
        auto look = [&](int ii, int jj, double w) {
          if (L.periodic_y) jj = wrap(jj, L.ny);
          if (ii < 0 || ii >= L.nx || jj < 0 || jj >= L.ny) return;
          size_t nid = size_t(jj) * L.nx + ii;
          if (L.type[nid] == 1) acc += w * u[nid];
        };
        look(i - 1, j, L.wx);
        look(i + 1, j, L.wx);
        look(i, j - 1, L.wy);
        look(i, j + 1, L.wy);
        u[id] = acc / L.diag[id];
      }
  }
}

inline Level coarsen(const Level& f) {
  Level c;
  c.nx = std::max(1, (f.nx + 1) / 2);
  c.ny = f.periodic_y && (f.ny % 2 == 0) ? f.ny / 2 : std::max(1, (f.ny + 1) / 2);
  c.periodic_y = f.periodic_y && (f.ny % 2 == 0);
  // Galerkin weights under piecewise-constant prolongation: each coarse
  // interface collects two fine edges
  c.wx = 2 * f.wx;
  c.wy = 2 * f.wy;
  c.type.assign(size_t(c.nx) * c.ny, 0);
  for (int j = 0; j < c.ny; ++j)
    for (int i = 0; i < c.nx; ++i) {
      bool interior = false, d0 = false, d1 = false;
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          int fi = 2 * i + di, fj = 2 * j + dj;
          if (fi >= f.nx || fj >= f.ny) continue;
          std::uint8_t t = f.at(fi, fj);
          interior |= (t == 1);
          d0 |= (t == 2);
          d1 |= (t == 3);
        }
      c.type[size_t(j) * c.nx + i] = interior ? 1 : (d1 ? 3 : (d0 ? 2 : 0));
    }
  return c;
}

struct MG {
  std::vector<Level> levels;
  std::vector<Operator> ops;

  explicit MG(Level top) {
    levels.push_back(std::move(top));
    while (levels.back().nx * levels.back().ny > 1024 && levels.size() < 12)
      levels.push_back(coarsen(levels.back()));
    for (auto& L : levels) {
      Operator op{&L};
      op.build_diag(L);
    }
    ops.reserve(levels.size());
    for (auto& L : levels) ops.push_back(Operator{&L});
  }

  void vcycle(size_t k, std::vector<double>& u, const std::vector<double>& b) {
    Level& L = levels[k];
    if (k + 1 == levels.size()) {
      smooth(L, u, b, 40);
      smooth(L, u, b, 40, true);
      return;
    }
    smooth(L, u, b, 3);
    std::vector<double> Au;
    ops[k].apply(u, Au);
    std::vector<double> r(b.size());
    for (size_t t = 0; t < b.size(); ++t)
      r[t] = (L.type[t] == 1) ? b[t] - Au[t] : 0.0;
    // restrict (mask-aware averaging)
    Level& C = levels[k + 1];
    std::vector<double> rc(C.type.size(), 0.0), ec(C.type.size(), 0.0);
    for (int j = 0; j < C.ny; ++j)
      for (int i = 0; i < C.nx; ++i) {
        if (C.at(i, j) != 1) continue;
        double acc = 0;
        for (int dj = 0; dj < 2; ++dj)
          for (int di = 0; di < 2; ++di) {
            int fi = 2 * i + di, fj = 2 * j + dj;
            if (fi >= L.nx || fj >= L.ny) continue;
            acc += r[size_t(fj) * L.nx + fi];
          }
        rc[size_t(j) * C.nx + i] = acc;
      }
    vcycle(k + 1, ec, rc);
    // prolongate (piecewise constant) and correct
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        size_t id = size_t(j) * L.nx + i;
        if (L.type[id] != 1) continue;
        int ci = std::min(i / 2, C.nx - 1), cj = std::min(j / 2, C.ny - 1);
        if (C.at(ci, cj) == 1) u[id] += ec[size_t(cj) * C.nx + ci];
      }
    smooth(L, u, b, 3, true);
  }
};

} // namespace griddetail

struct SolveStats {
  int vcycles = 0;
  long cg_iters = 0;
  double residual = 0;
};

/// Solve the discrete Dirichlet problem (u = 0 on label-2 cells, u = 1 on
/// label-3 cells, natural Neumann on free boundary) and return the potential.
inline std::vector<double> solve_potential(const GridDomain& g, double tol,
                                           SolveStats* stats = nullptr) {
  using namespace griddetail;
  Level top;
  top.nx = g.nx;
  top.ny = g.ny;
  top.periodic_y = g.periodic_y;
  top.wx = g.wx();
  top.wy = g.wy();
  top.type = g.cell;

  // right-hand side from Dirichlet-1 neighbors
  std::vector<double> b(top.type.size(), 0.0);
  for (int j = 0; j < top.ny; ++j)
    for (int i = 0; i < top.nx; ++i) {
      size_t id = size_t(j) * top.nx + i;
      if (top.type[id] != 1) continue;
      auto look = [&](int ii, int jj, double w) {
        if (top.periodic_y) jj = wrap(jj, top.ny);
        if (ii < 0 || ii >= top.nx || jj < 0 || jj >= top.ny) return;
        if (top.type[size_t(jj) * top.nx + ii] == 3) b[id] += 2 * w;
      };
      look(i - 1, j, top.wx);
      look(i + 1, j, top.wx);
      look(i, j - 1, top.wy);
      look(i, j + 1, top.wy);
    }

  MG mg(std::move(top));
  const Level& L = mg.levels[0];
  std::vector<double> u(b.size(), 0.0);

  double bnorm = 0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0) fail_pre("solve_potential: no Dirichlet-1 boundary touches the domain");

  // CG preconditioned by one symmetric V-cycle
  auto precond = [&](const std::vector<double>& r) {
    std::vector<double> z(r.size(), 0.0);
    mg.vcycle(0, z, r);
    double zr = 0;
    for (size_t t = 0; t < r.size(); ++t) zr += z[t] * r[t];
    if (!(zr > 0) || !std::isfinite(zr)) return r; // fall back to identity
    return z;
  };

  std::vector<double> r = b, Ap;
  std::vector<double> z = precond(r);
  std::vector<double> pdir = z;
  double rz = 0;
  for (size_t t = 0; t < r.size(); ++t) rz += r[t] * z[t];
  double res = 1.0;
  long it = 0;
  const long max_it = 2000;
  for (; it < max_it; ++it) {
    double rn = 0;
    for (double v : r) rn += v * v;
    res = std::sqrt(rn) / bnorm;
    if (res < tol) break;
    mg.ops[0].apply(pdir, Ap);
    double pAp = 0;
    for (size_t t = 0; t < r.size(); ++t) pAp += pdir[t] * Ap[t];
    if (!(pAp > 0)) break;
    double alpha = rz / pAp;
    for (size_t t = 0; t < r.size(); ++t) {
      u[t] += alpha * pdir[t];
      r[t] -= alpha * Ap[t];
    }
    z = precond(r);
    double rz2 = 0;
    for (size_t t = 0; t < r.size(); ++t) rz2 += r[t] * z[t];
    double beta = rz2 / rz;
    rz = rz2;
    for (size_t t = 0; t < r.size(); ++t) pdir[t] = z[t] + beta * pdir[t];
  }
  if (stats) stats->cg_iters = it;
  {
    // explicit residual check
    std::vector<double> Au;
    mg.ops[0].apply(u, Au);
    double rn = 0;
    for (size_t t = 0; t < b.size(); ++t) {
      double d = (L.type[t] == 1) ? b[t] - Au[t] : 0.0;
      rn += d * d;
    }
    res = std::sqrt(rn) / bnorm;
  }
  if (res >= tol * 10) fail_num("solver did not converge: residual " + fmt_double(res));
  if (stats) {
    stats->vcycles = static_cast<int>(it);
    stats->residual = res;
  }
  return u;
}

/// Discrete Dirichlet energy of the solved potential: the sum over grid
/// edges with at least one interior endpoint (edges between two Dirichlet
/// cells are degenerate raster artifacts and are excluded).
inline double dirichlet_energy(const GridDomain& g, const std::vector<double>& u) {
  double e = 0;
  auto cellval = [&](int i, int j, std::uint8_t t) -> double {
    return t == 1 ? u[size_t(j) * g.nx + i] : (t == 3 ? 1.0 : 0.0);
  };
  auto edge = [&](int i1, int j1, int i2, int j2, double w) {
    if (g.periodic_y) j2 = griddetail::wrap(j2, g.ny);
    if (i2 < 0 || i2 >= g.nx || j2 < 0 || j2 >= g.ny) return;
    std::uint8_t t1 = g.at(i1, j1), t2 = g.at(i2, j2);
    if (t1 == 0 || t2 == 0) return; // Neumann edge
    if (t1 != 1 && t2 != 1) return; // fixed-fixed: no variational content
    if (t1 != 1 || t2 != 1) w *= 2; // Dirichlet face at half-cell distance
    double d = cellval(i1, j1, t1) - cellval(i2, j2, t2);
    e += w * d * d;
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.at(i, j) == 0) continue;
      edge(i, j, i + 1, j, g.wx());
      edge(i, j, i, j + 1, g.wy());
    }
  return e;
}

/// Structural checks: nonempty connected interior, both boundary labels
/// adjacent to it. Throws argument errors per the module contract.
inline void validate_domain(const GridDomain& g) {
  long interior = 0;
  int seed = -1;
  for (size_t t = 0; t < g.cell.size(); ++t)
    if (g.cell[t] == 1) {
      ++interior;
      if (seed < 0) seed = static_cast<int>(t);
    }
  if (interior == 0) fail_pre("grid domain: empty interior");
  // flood fill
  std::vector<std::uint8_t> seen(g.cell.size(), 0);
  std::vector<int> stack = {seed};
  seen[seed] = 1;
  long reached = 0;
  bool touch0 = false, touch1 = false;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    ++reached;
    int i = id % g.nx, j = id / g.nx;
    auto visit = [&](int ii, int jj) {
      if (g.periodic_y) jj = griddetail::wrap(jj, g.ny);
      if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny) return;
      size_t nid = size_t(jj) * g.nx + ii;
      std::uint8_t t = g.cell[nid];
      if (t == 2) touch0 = true;
      if (t == 3) touch1 = true;
      if (t == 1 && !seen[nid]) {
        seen[nid] = 1;
        stack.push_back(static_cast<int>(nid));
      }
    };
    visit(i - 1, j);
    visit(i + 1, j);
    visit(i, j - 1);
    visit(i, j + 1);
  }
  if (reached != interior) fail_pre("grid domain: interior mask is disconnected");
  if (!touch0)
    fail_pre(g.mode == GridMode::annulus ? "grid domain: inner boundary label missing"
                                         : "grid domain: side-a label missing");
  if (!touch1)
    fail_pre(g.mode == GridMode::annulus ? "grid domain: outer boundary label missing"
                                         : "grid domain: side-b label missing");
}

/// Modulus of a single raster (no refinement ladder): 1 / Dirichlet energy.
inline double modulus_single(const GridDomain& g, const RunConfig& cfg,
                             SolveStats* stats = nullptr) {
  validate_domain(g);
  std::vector<double> u = solve_potential(g, cfg.solver_tol, stats);
  double e = dirichlet_energy(g, u);
  if (!(e > 0)) fail_num("modulus: zero Dirichlet energy");
  return 1.0 / e;
}

using DomainBuilder = std::function<GridDomain(int cells)>;

/// Modulus with the refinement-ladder error bar: value from the fine grid,
/// error from the coarse-fine difference.
inline Modulus modulus_with_ladder(const DomainBuilder& build, const RunConfig& cfg) {
  double coarse = modulus_single(build(cfg.grid_cells), cfg);
  double fine = modulus_single(build(cfg.grid_cells * cfg.grid_refine_factor), cfg);
  Modulus m;
  m.value = fine;
  m.error = std::abs(fine - coarse);
  // guard against an accidental zero difference masking real error
  m.error = std::max(m.error, 1e-9 * std::abs(fine));
  return m;
}

/// Spec operations: extremal distance between the labeled boundary pieces.
inline Modulus annulus_modulus(const DomainBuilder& build, const RunConfig& cfg) {
  return modulus_with_ladder(build, cfg);
}
inline Modulus quad_modulus(const DomainBuilder& build, const RunConfig& cfg) {
  return modulus_with_ladder(build, cfg);
}

} // namespace decor
