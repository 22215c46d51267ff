#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>

#include "decor/angle.hpp"
#include "decor/cycle.hpp"
#include "decor/dynamics.hpp"
#include "decor/geometry.hpp"

namespace decor {

enum class TraceStatus { landed, truncated, escaped_precision };

inline const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::landed: return "landed";
    case TraceStatus::truncated: return "truncated";
    case TraceStatus::escaped_precision: return "escaped-precision";
  }
  return "?";
}

/// A traced external ray: samples ordered by strictly decreasing Green
/// level, deterministic for a fixed step schedule.
struct RayTrace {
  Angle angle;
  std::vector<cplx> points;
  std::vector<double> levels;
  std::optional<cplx> landing;
  TraceStatus status = TraceStatus::truncated;

  cplx deepest() const { return points.back(); }
};

struct Equipotential {
  double level = 0;
  Polyline samples; // closed
};

namespace detail {

inline constexpr double kFarLevel = 30.0; // ln|z| where Boettcher ~ identity

template <class T>
bool newton_to_target(const QuadraticMap& map, int n, std::complex<T> target, cplx& z,
                      double tol) {
  using C = std::complex<T>;
  C zz(static_cast<T>(z.real()), static_cast<T>(z.imag()));
  C c(static_cast<T>(map.c().real()), static_cast<T>(map.c().imag()));
  for (int it = 0; it < 60; ++it) {
    C w = zz, dw = C(1);
    for (int k = 0; k < n; ++k) {
      dw = T(2) * w * dw;
      w = w * w + c;
    }
    C delta = (w - target) / dw;
    zz -= delta;
    if (std::abs(delta) <= static_cast<T>(tol) * std::max<T>(T(1), std::abs(zz))) {
      z = cplx(static_cast<double>(zz.real()), static_cast<double>(zz.imag()));
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    }
    if (!(std::abs(zz) < static_cast<T>(1e200))) return false;
  }
  return false;
}

/// Solve for the ray point of `angle` at Green level g, seeded from z.
inline bool ray_point_at(const QuadraticMap& map, const Angle& angle, double g, cplx& z,
                         const RunConfig& cfg) {
  int n = 0;
  double lvl = g;
  while (lvl < kFarLevel && n < 1060) {
    lvl *= 2;
    ++n;
  }
  double arg = kTwoPi * angle.iterate(n).to_double();
  double r = std::exp(std::min(lvl, 300.0));
  cplx target = std::polar(r, arg);
  if (cfg.extended_precision)
    return newton_to_target<long double>(map, n, std::complex<long double>(target), z, cfg.newton_tol);
  return newton_to_target<double>(map, n, std::complex<double>(target), z, cfg.newton_tol);
}

/// Descend from level g_hi (point z) to g_lo, bisecting the level step in
/// log scale when Newton loses the ray.
inline bool descend(const QuadraticMap& map, const Angle& angle, double g_hi, double g_lo,
                    cplx& z, const RunConfig& cfg, int depth = 0) {
  cplx trial = z;
  if (ray_point_at(map, angle, g_lo, trial, cfg)) {
    z = trial;
    return true;
  }
  if (depth >= 14) return false;
  double mid = std::sqrt(g_hi * g_lo);
  if (!descend(map, angle, g_hi, mid, z, cfg, depth + 1)) return false;
  return descend(map, angle, mid, g_lo, z, cfg, depth + 1);
}

} // namespace detail

/// External ray of the given angle traced from the far field down to
/// target_level; the stored samples start at the base equipotential level.
inline RayTrace trace_ray(const QuadraticMap& map, const Angle& angle, double target_level,
                          const RunConfig& cfg = {}) {
  if (!(target_level > 0)) fail_pre("trace_ray: target_level must be positive");
  RayTrace tr;
  tr.angle = angle;
  double g = detail::kFarLevel;
  cplx z = std::polar(std::exp(g), kTwoPi * angle.to_double());
  if (!detail::ray_point_at(map, angle, g, z, cfg)) {
    tr.status = TraceStatus::escaped_precision;
    return tr;
  }
  const double keep_from = 2.0 * cfg.base_level;
  const double step = std::pow(2.0, -1.0 / cfg.ray_substeps);
  while (g > target_level) {
    double next = std::max(g * step, target_level);
    if (!detail::descend(map, angle, g, next, z, cfg)) {
      tr.status = TraceStatus::escaped_precision;
      return tr;
    }
    g = next;
    if (g <= keep_from) {
      tr.points.push_back(z);
      tr.levels.push_back(g);
    }
  }
  tr.status = TraceStatus::truncated;
  // landing: deepest samples clustering within the landing tolerance
  if (tr.points.size() >= 5) {
    double diam = 0;
    for (size_t i = tr.points.size() - 5; i < tr.points.size(); ++i)
      for (size_t j = i + 1; j < tr.points.size(); ++j)
        diam = std::max(diam, dist(tr.points[i], tr.points[j]));
    if (diam <= cfg.landing_tol) {
      tr.landing = tr.points.back();
      tr.status = TraceStatus::landed;
    }
  }
  return tr;
}

/// Does the trace land at `pt`: deepest 5 samples within tol and
/// monotonically approaching.
inline bool lands_at(const RayTrace& tr, cplx pt, double tol) {
  if (tr.points.size() < 5) return false;
  double prev = 1e300;
  for (size_t i = tr.points.size() - 5; i < tr.points.size(); ++i) {
    double d = dist(tr.points[i], pt);
    if (d > tol || d > prev * (1 + 1e-9)) return false;
    prev = d;
  }
  return true;
}

/// Closed equipotential polyline at the given Green level, parametrized by
/// Boettcher angle.
inline Equipotential equipotential(const QuadraticMap& map, double level, int samples,
                                   const RunConfig& cfg = {}) {
  if (!(level > 0)) fail_pre("equipotential: level must be positive");
  if (samples < 16) fail_pre("equipotential: need at least 16 samples");
  Equipotential eq;
  eq.level = level;
  eq.samples.reserve(samples);
  cplx z = std::polar(std::exp(std::min(level, detail::kFarLevel)), 0.0);
  for (int i = 0; i < samples; ++i) {
    Angle a(i, samples);
    // seed from the previous sample; for the first one walk down the 0-ray
    if (i == 0) {
      double g = detail::kFarLevel;
      z = std::polar(std::exp(g), 0.0);
      if (!detail::ray_point_at(map, a, g, z, cfg) ||
          !detail::descend(map, a, g, level, z, cfg))
        fail_num("equipotential: lost the 0-ray seed");
    } else {
      cplx trial = z;
      if (!detail::ray_point_at(map, a, level, trial, cfg)) {
        // re-seed through a fresh ray trace at this angle
        double g = detail::kFarLevel;
        trial = std::polar(std::exp(g), kTwoPi * a.to_double());
        if (!detail::ray_point_at(map, a, g, trial, cfg) ||
            !detail::descend(map, a, g, level, trial, cfg))
          fail_num("equipotential: Newton diverged at sample " + std::to_string(i));
      }
      z = trial;
    }
    eq.samples.push_back(z);
  }
  return eq;
}

/// Green level deep enough that a ray landing at a preimage of alpha is
/// within `tol` of its landing point: near a repelling point of multiplier
/// lambda the distance scales like g^{log|lambda|/log 2}. Clamped so that
/// the requested depth stays within the precision of the Newton corrector
/// (position resolution ~1e-9 in double, ~1e-12 extended).
inline double landing_target_level(const QuadraticMap& map, double tol,
                                   bool extended = false) {
  double lam = std::abs(2.0 * map.alpha());
  if (!(lam > 1.0)) return 1e-30;
  double kappa = std::log(lam) / std::log(2.0);
  double g_tol = std::pow(std::min(tol, 1e-4), 1.1 / kappa);
  double g_prec = std::pow(extended ? 1e-12 : 1e-9, 1.0 / kappa);
  return std::clamp(std::max(g_tol, g_prec), 1e-250, 1e-6);
}

struct RotationResult {
  bool determined = false;
  int p = 0, q = 0;
  AngleCycle cycle;
};

/// Identify the combinatorial rotation number of alpha by landing tests:
/// the cycle's rays must all land at alpha within tolerance.
inline RotationResult detect_rotation_number(const QuadraticMap& map, int q_max,
                                             const RunConfig& cfg = {}) {
  if (q_max < 2) fail_pre("detect_rotation_number: q_max >= 2");
  if (!map.alpha_repelling()) fail_pre("detect_rotation_number: alpha not repelling");
  RotationResult res;
  for (int q = 2; q <= q_max; ++q) {
    for (int p = 1; p < q; ++p) {
      mpz_class g;
      mpz_gcd_ui(g.get_mpz_t(), mpz_class(p).get_mpz_t(), (unsigned long)q);
      if (g != 1) continue;
      AngleCycle cyc = alpha_cycle(p, q);
      double target = landing_target_level(map, cfg.rotation_landing_tol, cfg.extended_precision);
      bool all_land = true;
      for (const Angle& a : cyc.angles) {
        RayTrace tr = trace_ray(map, a, target, cfg);
        if (tr.status == TraceStatus::escaped_precision ||
            !lands_at(tr, map.alpha(), cfg.rotation_landing_tol)) {
          all_land = false;
          break;
        }
      }
      if (all_land) {
        if (res.determined)
          fail_num("detect_rotation_number: multiple cycles land at alpha");
        res.determined = true;
        res.p = p;
        res.q = q;
        res.cycle = cyc;
      }
    }
    if (res.determined) break; // smallest q wins; uniqueness within that q checked
  }
  return res;
}

// ---------------------------------------------------------------------------
// Ray cache: binary little-endian samples plus a JSON sidecar index.

class RayCache {
public:
  explicit RayCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
  }

  static std::string key(const QuadraticMap& map, const Angle& angle, const RunConfig& cfg,
                         double target_level) {
    // schedule hash: every parameter that shapes the sample sequence
    std::string sched = fmt_double(cfg.base_level) + "|" + std::to_string(cfg.ray_substeps) +
                        "|" + fmt_double(cfg.newton_tol) + "|" + fmt_double(target_level) +
                        "|" + (cfg.extended_precision ? "x" : "d");
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : sched) h = (h ^ (unsigned char)ch) * 1099511628211ull;
    return fmt_complex(map.c()) + "|" + angle.str() + "|" + std::to_string(h);
  }

  std::optional<RayTrace> try_get(const std::string& k) const {
    static_assert(std::endian::native == std::endian::little, "cache format is little-endian");
    std::lock_guard<std::mutex> lock(mu_);
    auto idx = read_index();
    auto it = idx.find(k);
    if (it == idx.end()) return std::nullopt;
    std::ifstream bin(dir_ / "rays.bin", std::ios::binary);
    if (!bin) return std::nullopt;
    bin.seekg(it->second.offset);
    RayTrace tr;
    tr.angle = Angle::parse(it->second.angle);
    tr.status = static_cast<TraceStatus>(it->second.status);
    tr.points.resize(it->second.count);
    tr.levels.resize(it->second.count);
    for (size_t i = 0; i < it->second.count; ++i) {
      double buf[3];
      bin.read(reinterpret_cast<char*>(buf), sizeof(buf));
      tr.levels[i] = buf[0];
      tr.points[i] = cplx(buf[1], buf[2]);
    }
    if (!bin) return std::nullopt;
    if (it->second.has_landing) tr.landing = tr.points.empty() ? cplx(0) : tr.points.back();
    return tr;
  }

  void put(const std::string& k, const RayTrace& tr) {
    std::lock_guard<std::mutex> lock(mu_);
    auto idx = read_index();
    if (idx.count(k)) return;
    std::ofstream bin(dir_ / "rays.bin", std::ios::binary | std::ios::app);
    if (!bin) fail_io("ray cache: cannot open " + (dir_ / "rays.bin").string());
    bin.seekp(0, std::ios::end);
    Record rec;
    rec.offset = static_cast<std::uint64_t>(bin.tellp());
    rec.count = tr.points.size();
    rec.angle = tr.angle.str();
    rec.status = static_cast<int>(tr.status);
    rec.has_landing = tr.landing.has_value();
    for (size_t i = 0; i < tr.points.size(); ++i) {
      double buf[3] = {tr.levels[i], tr.points[i].real(), tr.points[i].imag()};
      bin.write(reinterpret_cast<const char*>(buf), sizeof(buf));
    }
    bin.close();
    idx[k] = rec;
    write_index(idx);
  }

private:
  struct Record {
    std::uint64_t offset = 0;
    size_t count = 0;
    std::string angle;
    int status = 0;
    bool has_landing = false;
  };

  std::map<std::string, Record> read_index() const;
  void write_index(const std::map<std::string, Record>& idx) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

} // namespace decor

// The index I/O needs nlohmann/json; kept out of line so that this header
// stays readable.
#include <json.hpp>

namespace decor {

inline std::map<std::string, RayCache::Record> RayCache::read_index() const {
  std::map<std::string, Record> idx;
  std::ifstream in(dir_ / "rays.json");
  if (!in) return idx;
  nlohmann::json j;
  try {
    in >> j;
  } catch (...) {
    return idx;
  }
  for (auto& r : j["records"]) {
    Record rec;
    rec.offset = r["offset"].get<std::uint64_t>();
    rec.count = r["count"].get<size_t>();
    rec.angle = r["angle"].get<std::string>();
    rec.status = r["status"].get<int>();
    rec.has_landing = r["landing"].get<bool>();
    idx[r["key"].get<std::string>()] = rec;
  }
  return idx;
}

inline void RayCache::write_index(const std::map<std::string, Record>& idx) const {
  nlohmann::json j;
  j["schema"] = "decor/raycache/1";
  j["records"] = nlohmann::json::array();
  for (auto& [k, rec] : idx) {
    nlohmann::json r;
    r["key"] = k;
    r["offset"] = rec.offset;
    r["count"] = rec.count;
    r["angle"] = rec.angle;
    r["status"] = rec.status;
    r["landing"] = rec.has_landing;
    j["records"].push_back(r);
  }
  auto tmp = dir_ / "rays.json.tmp";
  std::ofstream out(tmp);
  out << j.dump(1);
  out.close();
  std::filesystem::rename(tmp, dir_ / "rays.json");
}

} // namespace decor
