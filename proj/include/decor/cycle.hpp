#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "decor/angle.hpp"

namespace decor {

/// The q angles of the rays landing at the alpha fixed point, in cyclic
/// order on the circle. Doubling permutes them, advancing the cyclic
/// position by p at each step.
struct AngleCycle {
  std::vector<Angle> angles; // sorted increasing in [0,1)
  int period = 0;            // q
  int rotation_p = 0;
  int rotation_q = 0;

  bool contains(const Angle& a) const {
    return std::binary_search(angles.begin(), angles.end(), a);
  }
};

namespace detail {

/// Rotation number of a doubling cycle given as a sorted angle list, or
/// nullopt if doubling does not advance the cyclic order by a constant.
inline std::optional<int> cycle_rotation(const std::vector<Angle>& sorted) {
  const int q = static_cast<int>(sorted.size());
  std::optional<int> step;
  for (int i = 0; i < q; ++i) {
    Angle im = sorted[i].doubled();
    auto it = std::lower_bound(sorted.begin(), sorted.end(), im);
    if (it == sorted.end() || !(*it == im)) return std::nullopt; // not invariant
    int j = static_cast<int>(it - sorted.begin());
    int s = ((j - i) % q + q) % q;
    if (step && *step != s) return std::nullopt;
    step = s;
  }
  return step;
}

} // namespace detail

/// The unique period-q cycle of the doubling map with rotation number p/q.
/// Exhaustive search over residues mod 2^q - 1; desk scale, so correctness
/// over cleverness (guarded well below the spec's q <= 64 bound since the
/// scan is O(2^q q)).
inline AngleCycle alpha_cycle(int p, int q) {
  if (q < 2 || p < 1 || p >= q) fail_pre("alpha_cycle: need 1 <= p < q, q >= 2");
  mpz_class g;
  mpz_gcd_ui(g.get_mpz_t(), mpz_class(p).get_mpz_t(), static_cast<unsigned long>(q));
  if (g != 1) fail_pre("alpha_cycle: p/q not reduced");
  if (q > 24) fail_pre("alpha_cycle: q > 24 exceeds the exhaustive-search guard");

  const std::uint64_t mod = (1ull << q) - 1ull;
  std::vector<char> seen(mod, 0);
  std::optional<AngleCycle> found;
  for (std::uint64_t r = 1; r < mod; ++r) {
    if (seen[r]) continue;
    std::vector<std::uint64_t> orbit;
    std::uint64_t x = r;
    do {
      orbit.push_back(x);
      seen[x] = 1;
      x = (x * 2) % mod;
    } while (x != r);
    if (static_cast<int>(orbit.size()) != q) continue;
    std::vector<Angle> sorted;
    sorted.reserve(q);
    for (auto n : orbit) sorted.emplace_back(static_cast<long>(n), static_cast<long>(mod));
    std::sort(sorted.begin(), sorted.end());
    auto rot = detail::cycle_rotation(sorted);
    if (rot && *rot == p) {
      if (found) fail_num("alpha_cycle: rotation number p/q not unique");
      AngleCycle c;
      c.angles = sorted;
      c.period = q;
      c.rotation_p = p;
      c.rotation_q = q;
      found = c;
    }
  }
  if (!found) fail_num("alpha_cycle: no cycle found (internal error)");
  return *found;
}

} // namespace decor
