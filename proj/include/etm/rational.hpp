#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "etm/error.hpp"

namespace etm {

// Exact arbitrary-precision rational, always kept in lowest terms with a
// positive denominator (mpq_class canonical form).
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) fail_input("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline bool rat_is_integer(const Rational& r) {
  return mpz_divisible_p(r.get_num().get_mpz_t(), r.get_den().get_mpz_t()) != 0;
}

// Parses "a", "-a" or "a/b". Whitespace is not accepted.
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) fail_input("empty rational literal");
  auto slash = s.find('/');
  std::string num = s.substr(0, slash == std::string::npos ? s.size() : slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  auto digits_ok = [](const std::string& t, bool sign_ok) {
    if (t.empty()) return false;
    size_t i = (sign_ok && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  if (!digits_ok(num, true) || !digits_ok(den, false))
    fail_input("malformed rational literal '" + s + "'");
  Rational r{mpz_class(num), mpz_class(den)};
  if (r.get_den() == 0) fail_input("rational with zero denominator: '" + s + "'");
  r.canonicalize();
  return r;
}

inline std::string rat_to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational rat_pow(const Rational& base, unsigned e) {
  Rational acc(1), b = base;
  unsigned k = e;
  while (k) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return acc;
}

// Exact square root when the argument is a square of a rational; used when
// orthogonalising bilinear forms. Returns false if no rational root exists.
inline bool rat_sqrt(const Rational& r, Rational& out) {
  if (r < 0) return false;
  mpz_class num = r.get_num(), den = r.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
    return false;
  mpz_class sn, sd;
  mpz_sqrt(sn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(sd.get_mpz_t(), den.get_mpz_t());
  out = Rational(sn, sd);
  out.canonicalize();
  return true;
}

// Residue of a rational modulo a word-sized prime; fails (returns false) when
// the denominator vanishes mod p, which callers treat as a bad prime.
inline bool rat_mod(const Rational& r, std::uint64_t p, std::uint64_t& out) {
  std::uint64_t n = mpz_fdiv_ui(r.get_num().get_mpz_t(), p);
  std::uint64_t d = mpz_fdiv_ui(r.get_den().get_mpz_t(), p);
  if (d == 0) return false;
  // Fermat inverse; p is prime and d != 0 mod p.
  std::uint64_t inv = 1, b = d, e = p - 2;
  while (e) {
    if (e & 1) inv = (unsigned __int128)inv * b % p;
    b = (unsigned __int128)b * b % p;
    e >>= 1;
  }
  out = (unsigned __int128)n * inv % p;
  return true;
}

}  // namespace etm
