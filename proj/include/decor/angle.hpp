#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "decor/common.hpp"

namespace decor {

/// An external angle: an exact rational point of R/Z, stored reduced in
/// [0, 1). All combinatorics of rays run through this type; no floating
/// point angle arithmetic anywhere.
class Angle {
public:
  Angle() : q_(0) {}
  Angle(long num, long den) : q_(num, den) { normalize(); }
  explicit Angle(const mpq_class& q) : q_(q) { normalize(); }

  static Angle parse(const std::string& s) {
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) {
        mpq_class q(s);
        q.canonicalize();
        return Angle(q);
      }
      mpz_class num(s.substr(0, slash));
      mpz_class den(s.substr(slash + 1));
      if (den == 0) fail_pre("angle denominator is zero: " + s);
      return Angle(mpq_class(num, den));
    } catch (const std::invalid_argument&) {
      fail_pre("malformed angle: " + s);
    }
  }

  const mpq_class& value() const { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }

  /// Angle action of f: theta -> 2 theta (mod 1), exact.
  Angle doubled() const { return Angle(q_ * 2); }

  Angle iterate(int n) const {
    mpq_class q = q_;
    mpz_mul_2exp(q.get_num_mpz_t(), q.get_num().get_mpz_t(), n);
    return Angle(q);
  }

  /// The two preimages under doubling: theta/2 and theta/2 + 1/2.
  std::pair<Angle, Angle> halves() const {
    mpq_class h = q_ / 2;
    return {Angle(h), Angle(h + mpq_class(1, 2))};
  }

  double to_double() const { return q_.get_d(); }

  std::string str() const { return q_.get_num().get_str() + "/" + q_.get_den().get_str(); }

  bool operator==(const Angle& o) const { return q_ == o.q_; }
  bool operator!=(const Angle& o) const { return q_ != o.q_; }
  bool operator<(const Angle& o) const { return q_ < o.q_; }
  bool operator>(const Angle& o) const { return o < *this; }
  bool operator<=(const Angle& o) const { return !(o < *this); }
  bool operator>=(const Angle& o) const { return !(*this < o); }

  Angle operator+(const Angle& o) const { return Angle(q_ + o.q_); }
  Angle operator-(const Angle& o) const { return Angle(q_ - o.q_); }

  /// theta + 1/2: the angle of -R_theta (the z -> -z mirror ray).
  Angle mirrored() const { return Angle(q_ + mpq_class(1, 2)); }

private:
  void normalize() {
    q_.canonicalize();
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q_.get_num().get_mpz_t(), q_.get_den().get_mpz_t());
    q_ -= fl;
  }

  mpq_class q_; // reduced, 0 <= q_ < 1
};

inline Angle doubling(const Angle& a) { return a.doubled(); }

/// All 2^depth solutions of doubling^depth(b) = a: b = (a + k) / 2^depth.
inline std::vector<Angle> preimages(const Angle& a, int depth) {
  if (depth < 0) fail_pre("preimages: negative depth");
  std::vector<Angle> out;
  mpz_class two_d = 1;
  mpz_mul_2exp(two_d.get_mpz_t(), two_d.get_mpz_t(), depth);
  for (mpz_class k = 0; k < two_d; ++k) {
    mpq_class q = (a.value() + k) / mpq_class(two_d);
    out.emplace_back(q);
  }
  return out;
}

/// Cyclic membership: is x strictly inside the arc (a, b) read
/// counterclockwise from a to b?
inline bool in_open_arc(const Angle& x, const Angle& a, const Angle& b) {
  if (a == b) return false;
  if (a < b) return a < x && x < b;
  return x > a || x < b; // arc wraps through 0
}

/// Counterclockwise arc length from a to b, in (0, 1].
inline mpq_class arc_length(const Angle& a, const Angle& b) {
  mpq_class d = b.value() - a.value();
  if (d <= 0) d += 1;
  return d;
}

/// Combinatorial length 2^k / ((2^q - 1) 2^m) of an external arc of a
/// depth-m dynamical puzzle piece whose depth-0 image selects k.
inline mpq_class combinatorial_length(int k, int m, int q) {
  if (q < 1 || k < 0 || k > q - 1 || m < 0) fail_pre("combinatorial_length: bad (k,m,q)");
  mpz_class num = 1, den = 1;
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), k);
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), q);
  den -= 1;
  mpz_class shift = 1;
  mpz_mul_2exp(shift.get_mpz_t(), shift.get_mpz_t(), m);
  den *= shift;
  mpq_class r(num, den);
  r.canonicalize();
  return r;
}

} // namespace decor
