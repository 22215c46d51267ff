#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>

#include "decor/cycle.hpp"
#include "decor/dyadic.hpp"
#include "decor/geometry.hpp"
#include "decor/ray.hpp"

namespace decor {

/// Node of the preimage tree of alpha (every puzzle vertex is an iterated
/// f-preimage of alpha; alpha' = -alpha is the depth-1 node).
struct Vertex {
  int id = -1;
  int parent = -1; // id of f(v); -1 sentinel for alpha itself (f(alpha) = alpha)
  int fdepth = 0;  // minimal m with f^m(v) = alpha
  cplx pos;
  std::vector<int> children;
};

struct ArcSpan {
  Angle a, b; // external arc, counterclockwise from a to b
};

/// A (geometric) puzzle piece: exact arc combinatorics plus boundary
/// geometry. The boundary walks equip-arc(arcs[i].a -> arcs[i].b), then ray
/// arcs[i].b down to vertex_ids[i], then ray arcs[(i+1)%k].a back up.
struct PuzzlePiece {
  std::vector<ArcSpan> arcs;
  std::vector<int> vertex_ids; // size = arcs.size()
  int ray_depth = 0;           // bidepth.first  (m)
  int equip_level = 0;         // bidepth.second (l)
  double level_value = 0;      // Green level of the truncating equipotential
  std::string label;
  bool critical = false; // contains the critical point 0
  long degree = 1;       // recorded covering degree onto the pullback source
  int image_piece = -1;  // index in the parent family (refine bookkeeping)

  std::vector<Polyline> equip_segs, down_segs, up_segs; // one triple per arc

  std::pair<int, int> bidepth() const { return {ray_depth, equip_level}; }

  Polyline boundary() const {
    Polyline out;
    for (size_t i = 0; i < arcs.size(); ++i) {
      out.insert(out.end(), equip_segs[i].begin(), equip_segs[i].end());
      out.insert(out.end(), down_segs[i].begin(), down_segs[i].end());
      out.insert(out.end(), up_segs[i].begin(), up_segs[i].end());
    }
    return out;
  }

  double diameter() const { return diameter_estimate(boundary()); }

  bool has_vertex(int vid) const {
    for (int v : vertex_ids)
      if (v == vid) return true;
    return false;
  }

  std::vector<Angle> all_angles() const {
    std::vector<Angle> out;
    for (auto& s : arcs) {
      out.push_back(s.a);
      out.push_back(s.b);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

/// Shared state of one puzzle: the map, the alpha cycle, the vertex tree,
/// traced rays and the angle landing table.
class PuzzleContext {
public:
  PuzzleContext(const QuadraticMap& map, AngleCycle cycle, RunConfig cfg)
      : map_(map), cycle_(std::move(cycle)), cfg_(cfg) {
    Vertex a;
    a.id = 0;
    a.parent = -1;
    a.fdepth = 0;
    a.pos = map_.alpha();
    vertices_.push_back(a);
    for (const Angle& t : cycle_.angles) landing_[t] = 0;
  }

  const QuadraticMap& map() const { return map_; }
  const AngleCycle& cycle() const { return cycle_; }
  const RunConfig& cfg() const { return cfg_; }
  int q() const { return cycle_.period; }

  const Vertex& vertex(int id) const { return vertices_.at(id); }
  int alpha_id() const { return 0; }
  int alpha_prime_id() { return child_of(0, -map_.alpha()); }

  /// Find-or-create the child of `parent` at position pos (f(pos) must equal
  /// vertex(parent).pos up to numeric noise). alpha is its own preimage.
  int child_of(int parent, cplx pos) {
    double scale = std::max(1.0, std::abs(pos));
    if (parent == 0 && dist(pos, vertices_[0].pos) < 1e-8 * scale) return 0;
    for (int cid : vertices_[parent].children)
      if (dist(vertices_[cid].pos, pos) < 1e-7 * scale) return cid;
    Vertex v;
    v.id = static_cast<int>(vertices_.size());
    v.parent = parent;
    v.fdepth = vertices_[parent].fdepth + 1;
    v.pos = pos;
    vertices_.push_back(v);
    vertices_[parent].children.push_back(v.id);
    return v.id;
  }

  int mirror_vertex(int vid) {
    const Vertex& v = vertices_.at(vid);
    if (vid == 0) return alpha_prime_id();
    return child_of(v.parent, -v.pos);
  }

  /// Landing vertex of the ray of angle a: table lookup, else resolve
  /// through the doubled angle and a deep trace of this ray.
  int vertex_of_angle(const Angle& a) {
    auto it = landing_.find(a);
    if (it != landing_.end()) return it->second;
    int up = vertex_of_angle(a.doubled());
    const Vertex& u = vertices_[up];
    cplx w = std::sqrt(u.pos - map_.c());
    if (std::abs(w) < 1e-9)
      fail_num("vertex_of_angle: vertex collides with the critical point");
    const RayTrace& tr = deep_ray(a);
    cplx zdeep = tr.points.back();
    cplx chosen = (dist(zdeep, w) <= dist(zdeep, -w)) ? w : -w;
    int id = child_of(up, chosen);
    landing_[a] = id;
    return id;
  }

  void register_landing(const Angle& a, int vertex_id) {
    auto [it, fresh] = landing_.emplace(a, vertex_id);
    if (!fresh && it->second != vertex_id)
      fail_num("inconsistent landing registration for angle " + a.str());
  }

  std::optional<int> known_landing(const Angle& a) const {
    auto it = landing_.find(a);
    return it == landing_.end() ? std::nullopt : std::optional<int>(it->second);
  }

  /// A trace of the ray of angle a reaching down at least to `target`.
  /// Shallower cache entries are re-traced. A precision-limited prefix is
  /// accepted if it got within a factor 1e3 of the target level (those
  /// samples themselves stay valid).
  const RayTrace& ray_at_least(const Angle& a, double target) {
    auto it = rays_.find(a);
    if (it != rays_.end() && !it->second.levels.empty() &&
        it->second.levels.back() <= target * (1 + 1e-9))
      return it->second;
    RayTrace tr = trace_ray(map_, a, target, cfg_);
    if (tr.points.empty() ||
        (tr.status == TraceStatus::escaped_precision && tr.levels.back() > target * 1e3))
      fail_num("ray trace lost precision at angle " + a.str());
    if (it != rays_.end() && it->second.levels.back() <= tr.levels.back())
      return it->second; // precision-limited: keep the deeper existing prefix
    auto [jt, _] = rays_.insert_or_assign(a, std::move(tr));
    return jt->second;
  }

  const RayTrace& deep_ray(const Angle& a) {
    return ray_at_least(a, landing_target_level(map_, cfg_.landing_tol, cfg_.extended_precision));
  }

  /// Point on the ray of angle a at Green level g.
  cplx ray_point(const Angle& a, double g) {
    const RayTrace& tr = ray_at_least(a, g);
    cplx z = tr.points.front();
    double best = 1e300;
    for (size_t i = 0; i < tr.levels.size(); ++i) {
      if (std::abs(tr.levels[i] - g) <= 1e-9 * g) return tr.points[i];
      double d = std::abs(std::log(tr.levels[i] / g));
      if (d < best) {
        best = d;
        z = tr.points[i];
      }
    }
    if (!detail::ray_point_at(map_, a, g, z, cfg_))
      fail_num("ray_point: Newton diverged at angle " + a.str() + " level " + fmt_double(g));
    return z;
  }

  /// Ray sub-polyline from level g down to the landing point (appended).
  Polyline ray_down(const Angle& a, double g) {
    const RayTrace& tr = deep_ray(a);
    Polyline out;
    out.push_back(ray_point(a, g));
    for (size_t i = 0; i < tr.levels.size(); ++i)
      if (tr.levels[i] < g * (1 - 1e-9)) out.push_back(tr.points[i]);
    out.push_back(vertices_[vertex_of_angle(a)].pos);
    return out;
  }

  /// Equipotential arc at level g, counterclockwise from angle a to b.
  Polyline equip_arc(const Angle& a, const Angle& b, double g) {
    mpq_class len = arc_length(a, b);
    int n = std::max<int>(3, static_cast<int>(std::ceil(len.get_d() * cfg_.equipotential_samples)));
    Polyline out;
    cplx seed = ray_point(a, g);
    out.push_back(seed);
    for (int i = 1; i < n; ++i) {
      Angle t(a.value() + len * i / n);
      cplx z = seed;
      if (!detail::ray_point_at(map_, t, g, z, cfg_)) fail_num("equip_arc: Newton diverged");
      out.push_back(z);
      seed = z;
    }
    out.push_back(ray_point(b, g));
    return out;
  }

  double level_of(int l) const { return cfg_.base_level * std::ldexp(1.0, -l); }
  size_t vertex_count() const { return vertices_.size(); }

private:
  QuadraticMap map_;
  AngleCycle cycle_;
  RunConfig cfg_;
  std::vector<Vertex> vertices_;
  std::map<Angle, int> landing_;
  std::map<Angle, RayTrace> rays_;
};

using ContextPtr = std::shared_ptr<PuzzleContext>;

/// All pieces of one bidepth, with criticality bookkeeping.
struct PieceFamily {
  ContextPtr ctx;
  int depth = 0;
  int equip_level = 0;
  std::vector<PuzzlePiece> pieces;
  int critical_index = -1;
  int critical_value_index = -1;

  const PuzzlePiece& critical() const {
    if (critical_index < 0) fail_num("family has no critical piece");
    return pieces[critical_index];
  }
};

struct LocateResult {
  enum class Status { found, on_boundary, outside } status = Status::outside;
  int piece = -1;
};

inline Location locate_in_piece(const PuzzlePiece& p, cplx z, double band_factor) {
  Polyline b = p.boundary();
  return locate_point(b, z, band_factor * diameter_estimate(b));
}

/// The unique piece whose Jordan boundary winds once around z; "on boundary"
/// is a first-class result.
inline LocateResult locate(const PieceFamily& fam, cplx z) {
  LocateResult res;
  for (size_t i = 0; i < fam.pieces.size(); ++i) {
    Location loc = locate_in_piece(fam.pieces[i], z, fam.ctx->cfg().boundary_band_factor);
    if (loc == Location::on_boundary) {
      res.status = LocateResult::Status::on_boundary;
      res.piece = static_cast<int>(i);
      return res;
    }
    if (loc == Location::inside) {
      res.status = LocateResult::Status::found;
      res.piece = static_cast<int>(i);
      return res;
    }
  }
  return res;
}

/// Is every sampled boundary point of `inner` inside-or-on `outer`?
inline bool piece_within(const PuzzlePiece& inner, const PuzzlePiece& outer, double band_factor,
                         int stride = 3) {
  Polyline ob = outer.boundary();
  double band = band_factor * diameter_estimate(ob);
  Polyline ib = inner.boundary();
  for (size_t i = 0; i < ib.size(); i += stride)
    if (locate_point(ob, ib[i], band) == Location::outside) return false;
  return true;
}

/// Strict containment check with a quantified margin: the smallest distance
/// from the inner boundary samples to the outer boundary, negative when a
/// sample escapes.
inline double containment_margin(const PuzzlePiece& inner, const PuzzlePiece& outer,
                                 int stride = 5) {
  Polyline ob = outer.boundary();
  Polyline ib = inner.boundary();
  double margin = 1e300;
  for (size_t i = 0; i < ib.size(); i += stride) {
    double d = distance_to_polyline(ob, ib[i], true);
    double w = winding_number(ob, ib[i]);
    if (std::abs(w) < 0.5) return -d; // sample outside
    margin = std::min(margin, d);
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Depth 0.

/// The q depth-0 pieces: sectors between consecutive alpha-cycle rays,
/// truncated by the base equipotential. Label Y0 goes to the critical one.
inline PieceFamily depth0_pieces(ContextPtr ctx) {
  const AngleCycle& cyc = ctx->cycle();
  if (!ctx->map().alpha_repelling())
    fail_pre("depth0_pieces: alpha is not repelling, cycle rays do not land");
  for (const Angle& a : cyc.angles) {
    const RayTrace& tr = ctx->deep_ray(a);
    if (!lands_at(tr, ctx->map().alpha(), ctx->cfg().rotation_landing_tol))
      fail_pre("depth0_pieces: ray " + a.str() + " does not land at alpha");
  }
  PieceFamily fam;
  fam.ctx = ctx;
  fam.depth = 0;
  fam.equip_level = 0;
  double g = ctx->level_of(0);
  const int q = cyc.period;
  for (int i = 0; i < q; ++i) {
    const Angle& a = cyc.angles[i];
    const Angle& b = cyc.angles[(i + 1) % q];
    PuzzlePiece p;
    p.arcs = {ArcSpan{a, b}};
    p.vertex_ids = {ctx->alpha_id()};
    p.ray_depth = 0;
    p.equip_level = 0;
    p.level_value = g;
    p.equip_segs = {ctx->equip_arc(a, b, g)};
    p.down_segs = {ctx->ray_down(b, g)};
    Polyline up = ctx->ray_down(a, g);
    std::reverse(up.begin(), up.end());
    p.up_segs = {up};
    fam.pieces.push_back(std::move(p));
  }
  for (size_t i = 0; i < fam.pieces.size(); ++i) {
    if (locate_in_piece(fam.pieces[i], 0.0, ctx->cfg().boundary_band_factor) == Location::inside) {
      fam.critical_index = static_cast<int>(i);
      fam.pieces[i].critical = true;
    }
    if (locate_in_piece(fam.pieces[i], ctx->map().c(), ctx->cfg().boundary_band_factor) ==
        Location::inside)
      fam.critical_value_index = static_cast<int>(i);
  }
  if (fam.critical_index < 0) fail_num("depth0_pieces: no piece contains the critical point");
  if (fam.critical_value_index < 0) fail_num("depth0_pieces: no piece contains the critical value");
  for (size_t i = 0; i < fam.pieces.size(); ++i) {
    int rel = static_cast<int>((i - fam.critical_index + fam.pieces.size()) % fam.pieces.size());
    fam.pieces[i].label = rel == 0 ? "Y0" : "Y0[" + std::to_string(rel) + "]";
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Pullback engine.

namespace pullback_detail {

struct Marked {
  Polyline pts;
  std::vector<size_t> seg_start; // 3 marks per arc: equip, down, up
};

inline Marked compose(const PuzzlePiece& p) {
  Marked m;
  for (size_t i = 0; i < p.arcs.size(); ++i) {
    for (auto s : {&p.equip_segs[i], &p.down_segs[i], &p.up_segs[i]}) {
      m.seg_start.push_back(m.pts.size());
      m.pts.insert(m.pts.end(), s->begin(), s->end());
    }
  }
  return m;
}

inline cplx sqrt_branch_near(cplx target, cplx near_pt) {
  cplx r = std::sqrt(target);
  return (dist(r, near_pt) <= dist(-r, near_pt)) ? r : -r;
}

/// Advance the lifted curve from w0 (a preimage of from_u) to a preimage of
/// to_u, subdividing adaptively where the branch choice gets ambiguous (the
/// source passing near the critical value). Appends subdivision points.
inline cplx advance_branch(const QuadraticMap& map, cplx from_u, cplx to_u, cplx w0,
                           Polyline& sink, int depth) {
  cplx cand = sqrt_branch_near(to_u - map.c(), w0);
  double sep = std::abs(2.0 * cand);
  if (dist(cand, w0) <= 0.45 * std::max(sep, 1e-280) || depth >= 46) {
    if (depth >= 46 && sep > 1e-12 && dist(cand, w0) > 0.49 * sep)
      fail_num("pullback: ambiguous sqrt branch near the critical point");
    return cand;
  }
  cplx mid_u = (from_u + to_u) * 0.5;
  cplx wm = advance_branch(map, from_u, mid_u, w0, sink, depth + 1);
  sink.push_back(wm);
  return advance_branch(map, mid_u, to_u, wm, sink, depth + 1);
}

struct PullbackCurve {
  Polyline pts;
  std::vector<size_t> seg_start;
  bool two_loops = false;
};

/// One branch of f^{-1} over the closed marked curve starting from `seed`
/// (f(seed) = src.pts[0]). Closes after one loop (univalent component) or
/// two (the critical component wrapping the branch point).
inline PullbackCurve pull_once(const QuadraticMap& map, const Marked& src, cplx seed) {
  PullbackCurve out;
  const size_t n = src.pts.size();
  cplx w = seed;

  auto run_loop = [&]() {
    size_t next_mark = 0;
    for (size_t i = 0; i < n; ++i) {
      if (next_mark < src.seg_start.size() && i == src.seg_start[next_mark]) {
        out.seg_start.push_back(out.pts.size());
        ++next_mark;
      }
      if (i == 0) {
        out.pts.push_back(w); // w is the current preimage of src.pts[0]
        continue;
      }
      w = advance_branch(map, src.pts[i - 1], src.pts[i], w, out.pts, 0);
      out.pts.push_back(w);
      if (out.pts.size() > 800000) fail_num("pullback: sample budget exceeded");
    }
    w = advance_branch(map, src.pts[n - 1], src.pts[0], w, out.pts, 0);
  };

  run_loop();
  double scale = std::max(diameter_estimate(out.pts), 1e-12);
  if (dist(w, seed) <= 1e-4 * scale) return out;
  if (dist(w, -seed) <= 1e-4 * scale) {
    out.two_loops = true;
    run_loop();
    if (dist(w, seed) > 1e-4 * scale)
      fail_num("pullback: curve failed to close after two loops");
    return out;
  }
  fail_num("pullback: branch continuation did not close (relative gap " +
           fmt_double(dist(w, seed) / scale) + ")");
}

/// Drop interior samples closer together than min_spacing.
inline Polyline thin(const Polyline& p, double min_spacing) {
  if (p.size() <= 2 || min_spacing <= 0) return p;
  Polyline out;
  out.push_back(p.front());
  for (size_t i = 1; i + 1 < p.size(); ++i)
    if (dist(p[i], out.back()) >= min_spacing) out.push_back(p[i]);
  out.push_back(p.back());
  return out;
}

} // namespace pullback_detail

/// All components of f^{-1}(piece): {W, -W} when the critical value is
/// outside, the single critical component otherwise. Exact arc combinatorics
/// follow the per-arc lift bits; landings are registered with the context.
inline std::vector<PuzzlePiece> pullback_components(ContextPtr ctx, const PuzzlePiece& piece) {
  using namespace pullback_detail;
  Marked src = compose(piece);
  if (src.pts.empty()) fail_pre("pullback: piece has no geometry");
  if (dist(src.pts[0], ctx->map().c()) < 1e-12)
    fail_num("pullback: boundary starts at the critical value");
  cplx seed = std::sqrt(src.pts[0] - ctx->map().c());
  PullbackCurve cur = pull_once(ctx->map(), src, seed);

  const size_t k = piece.arcs.size();
  const size_t loops = cur.two_loops ? 2 : 1;
  const size_t arcs_out = k * loops;

  auto segment = [&](size_t idx) -> Polyline {
    size_t from = cur.seg_start[idx];
    size_t to = idx + 1 < cur.seg_start.size() ? cur.seg_start[idx + 1] : cur.pts.size();
    return Polyline(cur.pts.begin() + from, cur.pts.begin() + to);
  };

  PuzzlePiece w;
  w.ray_depth = piece.ray_depth + 1;
  w.equip_level = piece.equip_level + 1;
  w.level_value = piece.level_value / 2;
  w.arcs.resize(arcs_out);
  w.vertex_ids.assign(arcs_out, -1);
  w.equip_segs.resize(arcs_out);
  w.down_segs.resize(arcs_out);
  w.up_segs.resize(arcs_out);

  for (size_t j = 0; j < arcs_out; ++j) {
    w.equip_segs[j] = segment(3 * j + 0);
    w.down_segs[j] = segment(3 * j + 1);
    w.up_segs[j] = segment(3 * j + 2);
  }

  // Arc angle lifts: one bit per arc, decided by matching the lifted equip
  // start against the two candidate ray points at the child level. The arc
  // end is forced: lift(b) = lift(a) + len(arc)/2, exact.
  for (size_t j = 0; j < arcs_out; ++j) {
    const ArcSpan& parc = piece.arcs[j % k];
    auto [a0, a1] = parc.a.halves();
    cplx p0 = ctx->ray_point(a0, w.level_value);
    cplx start = w.equip_segs[j].front();
    bool first = dist(start, p0) <= dist(start, -p0);
    if (dist(start, first ? p0 : -p0) > 0.25 * std::abs(2.0 * p0))
      fail_num("pullback: angle lift did not match the child geometry");
    Angle lift_a = first ? a0 : a1;
    Angle lift_b(lift_a.value() + arc_length(parc.a, parc.b) / 2);
    w.arcs[j] = ArcSpan{lift_a, lift_b};
  }

  // Junction vertices: children of the parent junction vertices.
  for (size_t j = 0; j < arcs_out; ++j) {
    int parent_vid = piece.vertex_ids[j % k];
    if (parent_vid < 0) fail_pre("pullback: piece lacks vertex ids");
    cplx vpos = w.down_segs[j].back();
    int vid = ctx->child_of(parent_vid, vpos);
    w.vertex_ids[j] = vid;
    ctx->register_landing(w.arcs[j].b, vid);
    ctx->register_landing(w.arcs[(j + 1) % arcs_out].a, vid);
  }

  // keep sample counts bounded across repeated pullbacks
  double spacing = 0.25 * ctx->cfg().pullback_max_seg * diameter_estimate(cur.pts);
  for (auto segs : {&w.equip_segs, &w.down_segs, &w.up_segs})
    for (auto& s : *segs) s = thin(s, spacing);

  std::vector<PuzzlePiece> out;
  if (cur.two_loops) {
    w.critical = true;
    out.push_back(std::move(w));
    return out;
  }

  PuzzlePiece m = w; // the mirrored univalent sibling
  for (size_t j = 0; j < arcs_out; ++j) {
    m.arcs[j].a = w.arcs[j].a.mirrored();
    m.arcs[j].b = w.arcs[j].b.mirrored();
    for (auto segs : {&m.equip_segs, &m.down_segs, &m.up_segs})
      for (auto& z : (*segs)[j]) z = -z;
    m.vertex_ids[j] = ctx->mirror_vertex(w.vertex_ids[j]);
  }
  for (size_t j = 0; j < arcs_out; ++j) {
    ctx->register_landing(m.arcs[j].b, m.vertex_ids[j]);
    ctx->register_landing(m.arcs[(j + 1) % arcs_out].a, m.vertex_ids[j]);
  }
  out.push_back(std::move(w));
  out.push_back(std::move(m));
  return out;
}

// ---------------------------------------------------------------------------
// Family refinement.

namespace detail_puzzle {

inline void label_depth1(PieceFamily& fam, const PieceFamily& depth0) {
  // paper labels: Y1 critical; Y1[i] with f(Y1[i]) = Y0[i+1] inside the
  // off-critical depth-0 pieces; Z1[i] = -Y1[i] attached to alpha'.
  const int q = depth0.ctx->cycle().period;
  ContextPtr ctx = fam.ctx;
  int alpha = ctx->alpha_id();
  std::map<int, int> y_index; // family index -> i
  for (size_t i = 0; i < fam.pieces.size(); ++i) {
    PuzzlePiece& p = fam.pieces[i];
    if (p.critical) {
      p.label = "Y1";
      continue;
    }
    if (p.has_vertex(alpha)) {
      int rel = static_cast<int>((p.image_piece - depth0.critical_index + 2 * q) % q);
      int idx = (rel + q - 1) % q; // f(Y1[i]) = Y0[i+1]
      p.label = "Y1[" + std::to_string(idx) + "]";
      y_index[static_cast<int>(i)] = idx;
    }
  }
  for (size_t i = 0; i < fam.pieces.size(); ++i) {
    PuzzlePiece& p = fam.pieces[i];
    if (p.critical || p.has_vertex(alpha)) continue;
    std::string lbl = "Z1[?]";
    std::vector<Angle> mine = p.all_angles();
    for (auto& [j, idx] : y_index) {
      std::vector<Angle> theirs = fam.pieces[j].all_angles();
      if (theirs.size() != mine.size()) continue;
      bool match = true;
      for (auto& t : theirs)
        match = match && std::binary_search(mine.begin(), mine.end(), t.mirrored());
      if (match) {
        lbl = "Z1[" + std::to_string(idx) + "]";
        break;
      }
    }
    p.label = lbl;
  }
}

} // namespace detail_puzzle

/// The family of depth m+1: all pullback components of the depth-m pieces.
inline PieceFamily refine(const PieceFamily& fam) {
  PieceFamily next;
  next.ctx = fam.ctx;
  next.depth = fam.depth + 1;
  next.equip_level = fam.equip_level + 1;
  for (size_t i = 0; i < fam.pieces.size(); ++i) {
    auto comps = pullback_components(fam.ctx, fam.pieces[i]);
    for (auto& c : comps) {
      c.image_piece = static_cast<int>(i);
      next.pieces.push_back(std::move(c));
    }
  }
  const auto& cfg = fam.ctx->cfg();
  for (size_t i = 0; i < next.pieces.size(); ++i) {
    PuzzlePiece& p = next.pieces[i];
    if (p.critical) {
      if (locate_in_piece(p, 0.0, cfg.boundary_band_factor) != Location::inside)
        fail_num("refine: critical pullback does not contain 0");
      next.critical_index = static_cast<int>(i);
    }
    if (locate_in_piece(p, fam.ctx->map().c(), cfg.boundary_band_factor) == Location::inside)
      next.critical_value_index = static_cast<int>(i);
  }
  if (next.critical_index < 0) fail_num("refine: no critical piece in the refined family");
  if (next.depth == 1) {
    detail_puzzle::label_depth1(next, fam);
  } else {
    for (auto& p : next.pieces) {
      if (p.critical)
        p.label = "Y" + std::to_string(next.depth);
      else if (p.image_piece >= 0)
        p.label = fam.pieces[p.image_piece].label + "'";
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// Derived pieces.

/// Z^0 = -Y^0: the mirror of the critical depth-0 piece, a geometric puzzle
/// piece of bidepth (1,0).
inline PuzzlePiece z0_piece(ContextPtr ctx, const PieceFamily& depth0) {
  const PuzzlePiece& y0 = depth0.critical();
  PuzzlePiece z = y0;
  z.label = "Z0";
  z.critical = false;
  z.ray_depth = 1;
  z.equip_level = 0;
  for (size_t j = 0; j < z.arcs.size(); ++j) {
    z.arcs[j].a = y0.arcs[j].a.mirrored();
    z.arcs[j].b = y0.arcs[j].b.mirrored();
    for (auto segs : {&z.equip_segs, &z.down_segs, &z.up_segs})
      for (auto& p : (*segs)[j]) p = -p;
    z.vertex_ids[j] = ctx->mirror_vertex(y0.vertex_ids[j]);
  }
  for (size_t j = 0; j < z.arcs.size(); ++j) {
    ctx->register_landing(z.arcs[j].b, z.vertex_ids[j]);
    ctx->register_landing(z.arcs[(j + 1) % z.arcs.size()].a, z.vertex_ids[j]);
  }
  return z;
}

/// Y(k): same external rays, truncation moved to equipotential level k
/// (deeper: k >= current level). Ray segments are trimmed by Green value.
inline PuzzlePiece truncate_piece(ContextPtr ctx, const PuzzlePiece& piece, int k) {
  if (k < piece.equip_level) fail_pre("truncate_piece: only deeper truncations supported");
  if (k == piece.equip_level) return piece;
  PuzzlePiece t = piece;
  t.equip_level = k;
  t.level_value = ctx->level_of(k);
  t.label = piece.label + "(" + std::to_string(k) + ")";
  for (size_t j = 0; j < t.arcs.size(); ++j) {
    t.equip_segs[j] = ctx->equip_arc(t.arcs[j].a, t.arcs[j].b, t.level_value);
    // trim the descending ray: drop samples above the new level
    Polyline down;
    down.push_back(ctx->ray_point(t.arcs[j].b, t.level_value));
    for (auto z : piece.down_segs[j]) {
      GreenResult g = ctx->map().green(z, ctx->cfg().green_budget);
      if (!g.below_resolution && g.value > t.level_value) continue;
      down.push_back(z);
    }
    t.down_segs[j] = down;
    Polyline up;
    for (auto z : piece.up_segs[j]) {
      GreenResult g = ctx->map().green(z, ctx->cfg().green_budget);
      if (!g.below_resolution && g.value > t.level_value) continue;
      up.push_back(z);
    }
    up.push_back(ctx->ray_point(t.arcs[(j + 1) % t.arcs.size()].a, t.level_value));
    t.up_segs[j] = up;
  }
  return t;
}

/// Image boundary under f (for the f-image coincidence checks).
inline Polyline image_boundary(ContextPtr ctx, const PuzzlePiece& piece) {
  Polyline out;
  for (auto z : piece.boundary()) out.push_back(ctx->map().apply(z));
  return out;
}

// ---------------------------------------------------------------------------
// Orbit pullbacks (Telescope bookkeeping).

struct PullbackResult {
  PuzzlePiece piece;
  long degree = 1; // 2^{number of critical passes}
  bool on_boundary = false;
  std::string boundary_detail;
};

/// The bidepth-(m+k, l+k) pullback of `piece` along f^k around z0
/// (requires f^k(z0) inside the piece). Degree doubles at each critical pass.
inline PullbackResult pullback_along_orbit(ContextPtr ctx, const PuzzlePiece& piece, int k,
                                           cplx z0) {
  std::vector<cplx> orbit(static_cast<size_t>(k) + 1);
  orbit[0] = z0;
  for (int i = 1; i <= k; ++i) orbit[i] = ctx->map().apply(orbit[i - 1]);

  PullbackResult res;
  {
    Location loc = locate_in_piece(piece, orbit[k], ctx->cfg().boundary_band_factor);
    if (loc == Location::on_boundary) {
      res.on_boundary = true;
      res.boundary_detail = "f^k(z) on the target piece boundary";
      res.piece = piece;
      return res;
    }
    if (loc == Location::outside) fail_pre("pullback_along_orbit: f^k(z) outside the piece");
  }

  PuzzlePiece cur = piece;
  for (int step = k - 1; step >= 0; --step) {
    auto comps = pullback_components(ctx, cur);
    bool found = false;
    for (auto& comp : comps) {
      Location loc = locate_in_piece(comp, orbit[step], ctx->cfg().boundary_band_factor);
      if (loc == Location::on_boundary) {
        res.on_boundary = true;
        res.boundary_detail =
            "orbit point at step " + std::to_string(step) + " on a pullback boundary";
        res.piece = comp;
        return res;
      }
      if (loc == Location::inside) {
        if (comp.critical) res.degree *= 2;
        cur = std::move(comp);
        found = true;
        break;
      }
    }
    if (!found) fail_num("pullback_along_orbit: orbit point escaped all pullback components");
  }
  cur.degree = res.degree;
  res.piece = std::move(cur);
  return res;
}

// ---------------------------------------------------------------------------
// Separating family (univalent f^{nq}-pullbacks of P attached to its
// vertices; 2^n pieces, pairwise disjoint).

struct SeparatingPiece {
  PuzzlePiece piece;
  int vertex = -1; // vertex of P it is attached to
};

/// Pairwise disjointness: no boundary sample of one piece strictly inside
/// another (beyond the band).
inline bool separating_disjoint_flag(const std::vector<SeparatingPiece>& S) {
  for (size_t i = 0; i < S.size(); ++i)
    for (size_t j = 0; j < S.size(); ++j) {
      if (i == j) continue;
      Polyline bi = S[i].piece.boundary(), bj = S[j].piece.boundary();
      double band = 1e-5 * diameter_estimate(bj);
      for (size_t t = 0; t < bi.size(); t += 5) {
        if (distance_to_polyline(bj, bi[t]) <= band) continue;
        if (std::abs(winding_number(bj, bi[t])) > 0.5) return false;
      }
    }
  return true;
}

inline std::vector<SeparatingPiece> separating_pieces(ContextPtr ctx, const PuzzlePiece& P, int n,
                                                      int q) {
  if (n < 1) fail_pre("separating_pieces: n >= 1");
  // one q-step univalent pullback of a piece, all components kept
  auto pull_q = [&](const PuzzlePiece& T) {
    std::vector<std::pair<PuzzlePiece, bool>> cur; // piece, univalent-so-far
    cur.emplace_back(T, true);
    for (int s = 0; s < q; ++s) {
      std::vector<std::pair<PuzzlePiece, bool>> next;
      for (auto& [p, uni] : cur) {
        auto comps = pullback_components(ctx, p);
        for (auto& cpc : comps) next.emplace_back(cpc, uni && !cpc.critical);
      }
      cur = std::move(next);
    }
    std::vector<PuzzlePiece> out;
    for (auto& [p, uni] : cur)
      if (uni) out.push_back(p);
    return out;
  };

  const double band = ctx->cfg().boundary_band_factor;
  std::vector<PuzzlePiece> S;
  for (auto& cand : pull_q(P))
    if (piece_within(cand, P, band)) S.push_back(cand);
  if (S.size() != 2)
    fail_num("separating_pieces: expected Q_L and Q_R, got " + std::to_string(S.size()));
  std::vector<PuzzlePiece> QLR = S;

  for (int round = 1; round < n; ++round) {
    std::vector<PuzzlePiece> next;
    for (auto& T : S)
      for (auto& cand : pull_q(T))
        for (auto& Q : QLR)
          if (piece_within(cand, Q, band)) next.push_back(cand);
    S = std::move(next);
  }
  if (S.size() != (size_t(1) << n))
    fail_num("separating_pieces: expected 2^n pieces, got " + std::to_string(S.size()));

  // attachment: the vertex of P whose boundary ray pair belongs to the piece
  std::vector<SeparatingPiece> out;
  for (auto& piece : S) {
    SeparatingPiece sp;
    sp.piece = piece;
    for (size_t i = 0; i < P.arcs.size(); ++i) {
      int v = P.vertex_ids[i];
      if (piece.has_vertex(v)) {
        Angle rb = P.arcs[i].b, ra = P.arcs[(i + 1) % P.arcs.size()].a;
        auto angles = piece.all_angles();
        bool hasb = std::binary_search(angles.begin(), angles.end(), rb);
        bool hasa = std::binary_search(angles.begin(), angles.end(), ra);
        if (hasa && hasb) {
          sp.vertex = v;
          break;
        }
      }
    }
    out.push_back(std::move(sp));
  }

  if (!separating_disjoint_flag(out))
    fail_num("separating_pieces: disjointness violated (tracing tolerance too coarse?)");
  return out;
}

} // namespace decor
