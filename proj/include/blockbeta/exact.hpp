#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockbeta/randcore.hpp"

namespace blockbeta {

// Arbitrary-precision rational scalar. mpq_class keeps values in canonical
// reduced form after every operation.
using Rat = mpq_class;
using RatVec = std::vector<Rat>;
using RatMat = std::vector<std::vector<Rat>>;

inline Rat rat_pow(Rat base, long e) {
  if (e < 0) {
    if (base == 0) throw std::domain_error("rat_pow: 0^negative");
    base = 1 / base;
    e = -e;
  }
  Rat out = 1;
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

inline std::string rat_str(const Rat& x) { return x.get_str(); }
inline double rat_double(const Rat& x) { return x.get_d(); }

// Exact rational square root, if one exists.
inline std::optional<Rat> rat_sqrt(const Rat& x) {
  if (x < 0) return std::nullopt;
  const mpz_class num = x.get_num(), den = x.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  Rat out(rn, rd);
  out.canonicalize();
  return out;
}

// mpq_class(a, b) does not reduce; always canonicalize on construction.
inline Rat make_rat(long num, long den = 1) {
  Rat out(num, den);
  out.canonicalize();
  return out;
}

// Small random rational, nonzero by default.
inline Rat random_rat(RngStream& rng, long num_range = 9, long den_range = 5,
                      bool allow_zero = false) {
  for (;;) {
    long num = long(rng.bits() % std::uint64_t(2 * num_range + 1)) - num_range;
    long den = long(rng.bits() % std::uint64_t(den_range)) + 1;
    if (num != 0 || allow_zero) return make_rat(num, den);
  }
}

// Distinct random rationals (for evaluation points of polynomial identities).
inline RatVec random_distinct_rats(RngStream& rng, int count, long num_range = 60) {
  RatVec out;
  while (int(out.size()) < count) {
    Rat x = random_rat(rng, num_range, 4, true);
    bool fresh = true;
    for (const auto& y : out) fresh = fresh && (x != y);
    if (fresh) out.push_back(x);
  }
  return out;
}

inline RatMat rat_zeros(int rows, int cols) {
  return RatMat(rows, RatVec(cols, Rat(0)));
}

// Exact determinant by fraction Gaussian elimination.
inline Rat det_exact(RatMat m) {
  const int n = int(m.size());
  for (const auto& row : m)
    if (int(row.size()) != n) throw std::invalid_argument("det_exact: not square");
  int sign = 1;
  Rat det = 1;
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (m[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return Rat(0);
    if (piv != c) {
      std::swap(m[piv], m[c]);
      sign = -sign;
    }
    det *= m[c][c];
    for (int r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      Rat f = m[r][c] / m[c][c];
      for (int k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return sign < 0 ? Rat(-det) : det;
}

}  // namespace blockbeta
