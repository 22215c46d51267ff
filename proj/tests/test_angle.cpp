#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "decor/angle.hpp"
#include "decor/cycle.hpp"
#include "decor/dyadic.hpp"

using namespace decor;

namespace {

// Independent oracle: enumerate every doubling orbit of exact period q on
// denominators 2^q - 1 and compute its cyclic rotation number from the
// order permutation (no reuse of alpha_cycle internals).
std::map<int, std::vector<Angle>> doubling_cycles_by_rotation(int q) {
  const std::uint64_t mod = (1ull << q) - 1ull;
  std::map<int, std::vector<Angle>> out;
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 1; r < mod; ++r) {
    if (seen.count(r)) continue;
    std::vector<std::uint64_t> orbit;
    std::uint64_t x = r;
    do {
      orbit.push_back(x);
      seen.insert(x);
      x = (2 * x) % mod;
    } while (x != r);
    if ((int)orbit.size() != q) continue;
    std::vector<std::uint64_t> sorted = orbit;
    std::sort(sorted.begin(), sorted.end());
    // position permutation induced by doubling
    std::vector<int> perm(q);
    for (int i = 0; i < q; ++i) {
      std::uint64_t im = (2 * sorted[i]) % mod;
      perm[i] = (int)(std::find(sorted.begin(), sorted.end(), im) - sorted.begin());
    }
    int step = (perm[0] - 0 + q) % q;
    bool rigid = true;
    for (int i = 0; i < q; ++i) rigid = rigid && (perm[i] == (i + step) % q);
    if (!rigid) continue;
    std::vector<Angle> angles;
    for (auto n : sorted) angles.emplace_back((long)n, (long)mod);
    if (out.count(step)) continue; // keep first only; uniqueness asserted elsewhere
    out[step] = angles;
  }
  return out;
}

long gcd_int(long a, long b) { return std::gcd(a, b); }

} // namespace

TEST_CASE("doubling acts exactly", "[angle]") {
  CHECK(doubling(Angle(1, 7)) == Angle(2, 7));
  CHECK(doubling(Angle(0, 1)) == Angle(0, 1));
  CHECK(doubling(Angle(2, 3)) == Angle(1, 3));
  CHECK(Angle(5, 6).doubled() == Angle(2, 3));
}

TEST_CASE("alpha_cycle matches frozen values", "[angle]") {
  auto c12 = alpha_cycle(1, 2);
  REQUIRE(c12.angles == std::vector<Angle>{Angle(1, 3), Angle(2, 3)});
  auto c13 = alpha_cycle(1, 3);
  REQUIRE(c13.angles == std::vector<Angle>{Angle(1, 7), Angle(2, 7), Angle(4, 7)});
  auto c23 = alpha_cycle(2, 3);
  REQUIRE(c23.angles == std::vector<Angle>{Angle(3, 7), Angle(5, 7), Angle(6, 7)});
}

TEST_CASE("alpha_cycle agrees with exhaustive oracle, q <= 8", "[angle][oracle]") {
  for (int q = 2; q <= 8; ++q) {
    auto oracle = doubling_cycles_by_rotation(q);
    for (int p = 1; p < q; ++p) {
      if (gcd_int(p, q) != 1) continue;
      auto got = alpha_cycle(p, q);
      REQUIRE(oracle.count(p) == 1);
      CHECK(got.angles == oracle[p]);
      CHECK(got.period == q);
    }
  }
}

TEST_CASE("alpha_cycle rejects bad input", "[angle]") {
  CHECK_THROWS_AS(alpha_cycle(2, 4), error);
  CHECK_THROWS_AS(alpha_cycle(0, 3), error);
  CHECK_THROWS_AS(alpha_cycle(3, 3), error);
}

TEST_CASE("cyclic order preserved with step p", "[angle]") {
  for (auto [p, q] : {std::pair{1, 5}, {2, 5}, {3, 7}, {3, 8}}) {
    auto c = alpha_cycle(p, q);
    for (int i = 0; i < q; ++i) {
      Angle im = c.angles[i].doubled();
      auto it = std::lower_bound(c.angles.begin(), c.angles.end(), im);
      REQUIRE(it != c.angles.end());
      CHECK(int(it - c.angles.begin()) == (i + p) % q);
    }
  }
}

TEST_CASE("preimages: frozen and roundtrip", "[angle]") {
  auto pre1 = preimages(Angle(1, 3), 1);
  CHECK(std::set<Angle>(pre1.begin(), pre1.end()) == std::set<Angle>{Angle(1, 6), Angle(2, 3)});
  auto pre0 = preimages(Angle(0, 1), 1);
  CHECK(std::set<Angle>(pre0.begin(), pre0.end()) == std::set<Angle>{Angle(0, 1), Angle(1, 2)});
  auto pre2 = preimages(Angle(1, 7), 2);
  CHECK(std::set<Angle>(pre2.begin(), pre2.end()) ==
        std::set<Angle>{Angle(1, 28), Angle(2, 7), Angle(15, 28), Angle(11, 14)});
}

TEST_CASE("doubling o preimages = identity (property)", "[angle]") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 200; ++trial) {
    long den = 1 + (long)(rng() % 10000);
    long num = (long)(rng() % (std::uint64_t)den);
    Angle a(num, den);
    int depth = 1 + int(rng() % 5);
    auto pres = preimages(a, depth);
    CHECK((int)pres.size() == (1 << depth));
    for (auto& b : pres) CHECK(b.iterate(depth) == a);
    CHECK(std::set<Angle>(pres.begin(), pres.end()).size() == pres.size());
  }
}

TEST_CASE("combinatorial length formula", "[angle]") {
  CHECK(combinatorial_length(0, 0, 2) == mpq_class(1, 3));
  CHECK(combinatorial_length(1, 0, 2) == mpq_class(2, 3));
  CHECK(combinatorial_length(0, 3, 3) == mpq_class(1, 56));
}

TEST_CASE("depth-0 arc lengths sum to 1", "[angle]") {
  // The q depth-0 pieces have external arcs of length 2^k/(2^q-1); over the
  // whole circle the arcs of the cycle partition it.
  for (int q = 2; q <= 8; ++q) {
    for (int p = 1; p < q; ++p) {
      if (gcd_int(p, q) != 1) continue;
      auto c = alpha_cycle(p, q);
      mpq_class total = 0;
      std::multiset<mpq_class> lengths;
      for (int i = 0; i < q; ++i) {
        mpq_class len = arc_length(c.angles[i], c.angles[(i + 1) % q]);
        total += len;
        lengths.insert(len);
      }
      CHECK(total == 1);
      // every arc length is one of the 2^k/(2^q-1)
      for (auto& len : lengths) {
        bool hit = false;
        for (int k = 0; k < q; ++k) hit = hit || (len == combinatorial_length(k, 0, q));
        CHECK(hit);
      }
    }
  }
}

TEST_CASE("dyadic labels: paper anchors and roundtrip", "[angle]") {
  CHECK(alpha_label().is_alpha);
  CHECK(alpha_label().value == 0);
  CHECK(dyadic_label({}).value == mpq_class(1, 2));      // alpha'
  CHECK(dyadic_label({+1, -1}).value == mpq_class(5, 8)); // 0.101_2

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> signs;
    int n = int(rng() % 10);
    for (int i = 0; i < n; ++i) signs.push_back(rng() % 2 ? 1 : -1);
    auto lbl = dyadic_label(signs);
    CHECK(dyadic_signs(lbl.value) == signs);
    CHECK(mpz_odd_p(lbl.value.get_num().get_mpz_t()));
  }
}

TEST_CASE("angle parse/format", "[angle]") {
  CHECK(Angle::parse("1/3") == Angle(1, 3));
  CHECK(Angle::parse("7/3") == Angle(1, 3));
  CHECK(Angle::parse("-1/3") == Angle(2, 3));
  CHECK(Angle(1, 3).str() == "1/3");
  CHECK_THROWS_AS(Angle::parse("1/0"), error);
  CHECK_THROWS_AS(Angle::parse("abc"), error);
}

TEST_CASE("in_open_arc handles wrap", "[angle]") {
  CHECK(in_open_arc(Angle(1, 2), Angle(1, 3), Angle(2, 3)));
  CHECK(!in_open_arc(Angle(1, 4), Angle(1, 3), Angle(2, 3)));
  CHECK(in_open_arc(Angle(0, 1), Angle(2, 3), Angle(1, 3)));
  CHECK(in_open_arc(Angle(5, 6), Angle(2, 3), Angle(1, 3)));
  CHECK(!in_open_arc(Angle(1, 2), Angle(2, 3), Angle(1, 3)));
}
