#pragma once

#include <vector>

#include "decor/angle.hpp"

namespace decor {

/// Sign convention for dyadic vertex labels: +1 encodes binary digit 1
/// ("below the chord" through alpha and alpha'; for vertices on the chord
/// the sign distinguishes the two symmetric preimages by Re > 0). Encode,
/// decode and the geometric derivation in puzzle.hpp all read this one
/// constant.
inline constexpr int kDyadicPlusBit = 1;

/// Label of an f^{q g}-preimage of alpha inside Y^1. alpha itself carries
/// the special label 0; a generation-g vertex (g >= 1) carries g-1 signs
/// and the value 0.s_1...s_{g-1}1 in binary, so alpha' (generation 1,
/// no signs) is 1/2.
struct DyadicVertexLabel {
  mpq_class value;        // i / 2^g, odd i; 0 for alpha
  std::vector<int> signs; // +1 / -1, length g-1; empty for alpha and alpha'
  bool is_alpha = false;

  std::string str() const { return is_alpha ? "0" : value.get_num().get_str() + "/" + value.get_den().get_str(); }

  bool operator==(const DyadicVertexLabel& o) const {
    return is_alpha == o.is_alpha && value == o.value;
  }
};

inline DyadicVertexLabel alpha_label() {
  DyadicVertexLabel l;
  l.value = 0;
  l.is_alpha = true;
  return l;
}

inline DyadicVertexLabel dyadic_label(const std::vector<int>& signs) {
  DyadicVertexLabel l;
  l.signs = signs;
  mpz_class num = 0;
  for (int s : signs) {
    if (s != 1 && s != -1) fail_pre("dyadic_label: signs must be +1/-1");
    num = num * 2 + ((s == 1) == (kDyadicPlusBit == 1) ? 1 : 0);
  }
  num = num * 2 + 1; // terminal digit 1
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), signs.size() + 1);
  l.value = mpq_class(num, den);
  l.value.canonicalize();
  return l;
}

/// Inverse of dyadic_label. Requires an odd-numerator dyadic in (0, 1).
inline std::vector<int> dyadic_signs(const mpq_class& value) {
  mpz_class num = value.get_num(), den = value.get_den();
  if (!(num > 0 && num < den) || mpz_scan1(den.get_mpz_t(), 0) != mpz_sizeinbase(den.get_mpz_t(), 2) - 1)
    fail_pre("dyadic_signs: not a dyadic fraction in (0,1)");
  if (mpz_even_p(num.get_mpz_t())) fail_pre("dyadic_signs: numerator must be odd");
  size_t g = mpz_sizeinbase(den.get_mpz_t(), 2) - 1; // den = 2^g
  // digits b_1..b_{g-1}, most significant first; b_g == 1 is the terminal
  std::vector<int> signs;
  for (size_t i = 1; i < g; ++i) {
    bool one = mpz_tstbit(num.get_mpz_t(), g - i) != 0;
    signs.push_back((one == (kDyadicPlusBit == 1)) ? 1 : -1);
  }
  return signs;
}

} // namespace decor
