#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "decor/common.hpp"
#include "decor/format.hpp"

namespace decor {

inline constexpr const char* kToolVersion = "decor 0.1.0";
inline constexpr const char* kReportSchema = "decor/report/1";

/// Every knob of the pipeline. A RunConfig is serialized into every report;
/// identical config + preset must reproduce reports byte for byte.
struct RunConfig {
  // ray tracing
  int ray_substeps = 4;          // sub-steps per dyadic Green-level halving
  double newton_tol = 1e-12;     // Newton step tolerance (relative)
  double landing_tol = 1e-8;     // ray landing tolerance
  double base_level = 1.0;       // Green level of the base equipotential (depth 0)
  double trace_target_level = 1e-7;
  double rotation_landing_tol = 1e-5;
  int green_budget = 10000;      // iteration budget per Green evaluation
  bool extended_precision = false;

  // puzzle geometry
  double boundary_band_factor = 1e-6; // "on boundary" band, times piece diameter
  int equipotential_samples = 256;
  double pullback_max_seg = 0.02; // max polyline segment length rel. to diameter

  // nest budgets
  long return_budget = 1000000;  // per-level iterate budget
  int renorm_check_returns = 1000;
  int max_nest_levels = 64;
  int escape_budget = 512;       // q-step budget M for the satellite verdict

  // modulus grid
  int grid_cells = 512;          // longest dimension of the base grid
  int grid_refine_factor = 2;    // refinement ladder 512 -> 1024
  double solver_tol = 1e-10;     // relative residual
  double strip_pad_cells = 10;   // truncation width beyond marked arcs, in units of h

  // unspecified constants of the paper's inequalities (config inputs)
  double delta0 = 0.1;           // QAL threshold delta_0
  double epsilon_covering = 0.05;// Covering Lemma eps(eta,T,D)
  double eta = 0.5;              // collar constant eta
  double gap_m = 2;              // m in the gap threshold m*q*n
  double apriori_floor = 0.01;   // floor for per-level moduli

  int detect_qmax = 6;
};

namespace detail {

struct ConfigKey {
  const char* name;
  const char* doc;
  enum { Int, Long, Double, Bool } type;
  void* RunConfig::* unused = nullptr;
};

template <class F>
inline void for_each_key(RunConfig& c, F&& f) {
  f("ray_substeps", c.ray_substeps, "sub-steps per dyadic Green-level halving");
  f("newton_tol", c.newton_tol, "Newton tolerance for ray correction");
  f("landing_tol", c.landing_tol, "ray landing tolerance");
  f("base_level", c.base_level, "Green level of the base (depth-0) equipotential");
  f("trace_target_level", c.trace_target_level, "default deepest Green level for traces");
  f("rotation_landing_tol", c.rotation_landing_tol, "landing tolerance for rotation-number detection");
  f("green_budget", c.green_budget, "iteration budget per Green evaluation");
  f("extended_precision", c.extended_precision, "use long double in the dynamical inner loops");
  f("boundary_band_factor", c.boundary_band_factor, "on-boundary band as a fraction of piece diameter");
  f("equipotential_samples", c.equipotential_samples, "samples per full equipotential");
  f("pullback_max_seg", c.pullback_max_seg, "max pullback polyline segment length relative to diameter");
  f("return_budget", c.return_budget, "per-level return-time budget (iterates)");
  f("renorm_check_returns", c.renorm_check_returns, "returns of g_chi checked before a renormalizable verdict");
  f("max_nest_levels", c.max_nest_levels, "hard cap on principal nest height");
  f("escape_budget", c.escape_budget, "q-step budget before the satellite verdict");
  f("grid_cells", c.grid_cells, "cells along the longest grid dimension");
  f("grid_refine_factor", c.grid_refine_factor, "refinement factor for the error ladder");
  f("solver_tol", c.solver_tol, "relative residual target of the Laplace solver");
  f("strip_pad_cells", c.strip_pad_cells, "strip truncation width beyond marked arcs, in cells");
  f("delta0", c.delta0, "QAL threshold delta_0 (unspecified in the source; config input)");
  f("epsilon_covering", c.epsilon_covering, "Covering Lemma smallness threshold (config input)");
  f("eta", c.eta, "collar constant eta");
  f("gap_m", c.gap_m, "m in the return-gap threshold m*q*n");
  f("apriori_floor", c.apriori_floor, "floor for per-level moduli in the a-priori report");
  f("detect_qmax", c.detect_qmax, "largest q tried by rotation-number detection");
}

inline void assign(int& slot, const std::string& v) { slot = std::stoi(v); }
inline void assign(long& slot, const std::string& v) { slot = std::stol(v); }
inline void assign(double& slot, const std::string& v) { slot = std::stod(v); }
inline void assign(bool& slot, const std::string& v) {
  if (v == "true" || v == "1") slot = true;
  else if (v == "false" || v == "0") slot = false;
  else fail_pre("config: bad bool value '" + v + "'");
}

inline std::string show(int v) { return std::to_string(v); }
inline std::string show(long v) { return std::to_string(v); }
inline std::string show(double v) { return fmt_double(v); }
inline std::string show(bool v) { return v ? "true" : "false"; }

} // namespace detail

inline void config_set(RunConfig& cfg, const std::string& key, const std::string& value) {
  bool hit = false;
  detail::for_each_key(cfg, [&](const char* name, auto& slot, const char*) {
    if (key == name) {
      detail::assign(slot, value);
      hit = true;
    }
  });
  if (!hit) fail_pre("config: unknown key '" + key + "'");
}

/// Flat key=value text, one entry per line; '#' comments.
inline RunConfig config_parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto notspace = line.find_first_not_of(" \t\r");
    if (notspace == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail_pre("config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    config_set(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline std::string config_serialize(const RunConfig& cfg) {
  std::string out;
  detail::for_each_key(const_cast<RunConfig&>(cfg), [&](const char* name, auto& slot, const char*) {
    out += std::string(name) + "=" + detail::show(slot) + "\n";
  });
  return out;
}

/// The generated reference page: every key, its default and one-line doc.
inline std::string config_reference() {
  RunConfig defaults;
  std::string out = "# Configuration reference\n\nFlat key=value entries; override on the command line with --set key=value.\n\n";
  detail::for_each_key(defaults, [&](const char* name, auto& slot, const char* doc) {
    out += std::string(name) + " = " + detail::show(slot) + "\n    " + doc + "\n";
  });
  return out;
}

} // namespace decor
