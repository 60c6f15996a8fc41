#pragma once

#include <map>
#include <string>
#include <vector>

#include "etm/error.hpp"
#include "etm/rational.hpp"

namespace etm {

namespace detail {

// Dense univariate polynomial over Q, coefficients low to high.
using QPoly = std::vector<Rational>;

inline void qpoly_trim(QPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Exact division by a monic divisor; remainder must vanish.
inline QPoly qpoly_div_exact(QPoly num, const QPoly& den) {
  QPoly q(num.size() >= den.size() ? num.size() - den.size() + 1 : 0, Rational(0));
  for (long i = static_cast<long>(num.size()) - 1; i >= static_cast<long>(den.size()) - 1; --i) {
    Rational c = num[i];
    if (c == 0) continue;
    long shift = i - (static_cast<long>(den.size()) - 1);
    q[shift] = c;
    for (size_t j = 0; j < den.size(); ++j) num[shift + j] -= c * den[j];
  }
  qpoly_trim(num);
  if (!num.empty()) fail_internal("inexact polynomial division");
  return q;
}

struct CycloField {
  unsigned n = 1;
  unsigned deg = 1;
  QPoly phi;                       // cyclotomic polynomial, monic
  std::vector<QPoly> red;          // red[k] = x^(deg+k) reduced mod phi
};

inline const CycloField& cyclo_field(unsigned n);

inline QPoly cyclotomic_poly(unsigned n) {
  if (n == 1) return {Rational(-1), Rational(1)};
  QPoly p(n + 1, Rational(0));
  p[0] = -1;
  p[n] = 1;
  for (unsigned d = 1; d < n; ++d)
    if (n % d == 0) p = qpoly_div_exact(p, cyclo_field(d).phi);
  return p;
}

inline const CycloField& cyclo_field(unsigned n) {
  static std::map<unsigned, CycloField> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  CycloField f;
  f.n = n;
  f.phi = cyclotomic_poly(n);
  f.deg = static_cast<unsigned>(f.phi.size()) - 1;
  // x^(deg+k) mod phi for any k reachable from products of reduced elements.
  if (f.deg >= 1) {
    QPoly cur(f.deg, Rational(0));  // x^deg mod phi = -(low part of phi)
    for (unsigned i = 0; i < f.deg; ++i) cur[i] = -f.phi[i];
    for (unsigned k = 0; k + 2 <= f.deg || k == 0; ++k) {
      f.red.push_back(cur);
      // multiply by x, reduce
      QPoly nxt(f.deg, Rational(0));
      for (unsigned i = 0; i + 1 < f.deg; ++i) nxt[i + 1] = cur[i];
      if (cur[f.deg - 1] != 0)
        for (unsigned i = 0; i < f.deg; ++i) nxt[i] += cur[f.deg - 1] * -f.phi[i];
      cur = nxt;
      if (f.red.size() >= (f.deg == 0 ? 1 : f.deg)) break;
    }
  }
  return cache.emplace(n, std::move(f)).first->second;
}

}  // namespace detail

// Element of Q or of a cyclotomic extension Q(zeta_n), n >= 3, stored on the
// power basis 1, zeta, ..., zeta^(phi(n)-1). Plain rationals carry level 1;
// mixing two distinct proper extensions is an error, promotion from Q is
// automatic. All arithmetic is exact.
class Scalar {
 public:
  Scalar() : n_(1), c_{Rational(0)} {}
  Scalar(long v) : n_(1), c_{Rational(v)} {}
  Scalar(int v) : n_(1), c_{Rational(v)} {}
  Scalar(const Rational& v) : n_(1), c_{v} {}

  static Scalar zeta(unsigned n) {
    require_input(n >= 1, "zeta level must be positive");
    if (n == 1) return Scalar(1);
    if (n == 2) return Scalar(-1);
    const auto& f = detail::cyclo_field(n);
    Scalar s;
    s.n_ = n;
    s.c_.assign(f.deg, Rational(0));
    if (f.deg == 1) {
      // phi(n) = 1 cannot happen for n >= 3, but keep the guard honest.
      s.c_[0] = -f.phi[0];
    } else {
      s.c_[1] = 1;
    }
    return s;
  }

  static Scalar from_coeffs(unsigned n, std::vector<Rational> coeffs) {
    if (n <= 2) {
      require_input(coeffs.size() == 1, "rational scalar takes one coefficient");
      return Scalar(n == 2 ? coeffs[0] : coeffs[0]);
    }
    const auto& f = detail::cyclo_field(n);
    require_input(coeffs.size() == f.deg, "coefficient vector has wrong length");
    Scalar s;
    s.n_ = n;
    s.c_ = std::move(coeffs);
    s.demote();
    return s;
  }

  unsigned level() const { return n_; }
  bool is_rational() const { return n_ == 1; }
  const std::vector<Rational>& coeffs() const { return c_; }

  const Rational& as_rational() const {
    if (n_ != 1) fail_input("scalar is not rational");
    return c_[0];
  }

  bool is_zero() const {
    for (const auto& c : c_)
      if (c != 0) return false;
    return true;
  }

  bool is_one() const { return n_ == 1 && c_[0] == 1; }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    auto [x, y] = aligned(a, b);
    for (size_t i = 0; i < x.c_.size(); ++i) x.c_[i] += y.c_[i];
    x.demote();
    return x;
  }

  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    auto [x, y] = aligned(a, b);
    for (size_t i = 0; i < x.c_.size(); ++i) x.c_[i] -= y.c_[i];
    x.demote();
    return x;
  }

  Scalar operator-() const {
    Scalar r = *this;
    for (auto& c : r.c_) c = -c;
    return r;
  }

  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    auto [x, y] = aligned(a, b);
    if (x.n_ == 1) {
      x.c_[0] *= y.c_[0];
      return x;
    }
    const auto& f = detail::cyclo_field(x.n_);
    std::vector<Rational> prod(2 * f.deg - 1, Rational(0));
    for (size_t i = 0; i < x.c_.size(); ++i) {
      if (x.c_[i] == 0) continue;
      for (size_t j = 0; j < y.c_.size(); ++j)
        if (y.c_[j] != 0) prod[i + j] += x.c_[i] * y.c_[j];
    }
    // reduce degrees >= deg using the precomputed table
    std::vector<Rational> out(prod.begin(), prod.begin() + f.deg);
    for (size_t k = f.deg; k < prod.size(); ++k) {
      if (prod[k] == 0) continue;
      const auto& row = f.red[k - f.deg];
      for (unsigned i = 0; i < f.deg; ++i) out[i] += prod[k] * row[i];
    }
    Scalar r;
    r.n_ = x.n_;
    r.c_ = std::move(out);
    r.demote();
    return r;
  }

  Scalar inverse() const {
    if (is_zero()) fail_input("division by zero");
    if (n_ == 1) {
      Scalar r;
      r.c_[0] = 1 / c_[0];
      return r;
    }
    // Extended Euclid of the element against phi_n over Q[x].
    const auto& f = detail::cyclo_field(n_);
    detail::QPoly r0 = f.phi, r1(c_.begin(), c_.end());
    detail::qpoly_trim(r1);
    detail::QPoly s0{}, s1{Rational(1)};  // coefficients of the element
    while (true) {
      if (r1.empty()) fail_internal("inverse of a zero divisor in a cyclotomic field");
      if (r1.size() == 1) break;  // constant gcd reached (phi_n is irreducible)
      // r0 = q*r1 + rem
      detail::QPoly rem = r0, q(rem.size() - r1.size() + 1, Rational(0));
      for (long i = static_cast<long>(rem.size()) - 1;
           i >= static_cast<long>(r1.size()) - 1; --i) {
        if (rem[i] == 0) continue;
        Rational c = rem[i] / r1.back();
        long shift = i - (static_cast<long>(r1.size()) - 1);
        q[shift] = c;
        for (size_t j = 0; j < r1.size(); ++j) rem[shift + j] -= c * r1[j];
      }
      detail::qpoly_trim(rem);
      // s_next = s0 - q*s1
      detail::QPoly qs(q.size() + s1.size(), Rational(0));
      for (size_t i = 0; i < q.size(); ++i)
        for (size_t j = 0; j < s1.size(); ++j) qs[i + j] += q[i] * s1[j];
      detail::QPoly s2(std::max(s0.size(), qs.size()), Rational(0));
      for (size_t i = 0; i < s0.size(); ++i) s2[i] += s0[i];
      for (size_t i = 0; i < qs.size(); ++i) s2[i] -= qs[i];
      detail::qpoly_trim(s2);
      r0 = std::move(r1);
      r1 = std::move(rem);
      s0 = std::move(s1);
      s1 = std::move(s2);
    }
    Rational g = r1[0];
    std::vector<Rational> out(f.deg, Rational(0));
    for (size_t i = 0; i < s1.size() && i < out.size(); ++i) out[i] = s1[i] / g;
    // s1 can have degree >= deg in principle; reduce defensively.
    for (size_t k = f.deg; k < s1.size(); ++k) {
      if (s1[k] == 0) continue;
      const auto& row = f.red[k - f.deg];
      for (unsigned i = 0; i < f.deg; ++i) out[i] += (s1[k] / g) * row[i];
    }
    Scalar r;
    r.n_ = n_;
    r.c_ = std::move(out);
    r.demote();
    return r;
  }

  friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inverse(); }

  Scalar pow(unsigned e) const {
    Scalar acc(1), b = *this;
    while (e) {
      if (e & 1) acc = acc * b;
      b = b * b;
      e >>= 1;
    }
    return acc;
  }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    auto [x, y] = aligned(a, b);
    return x.c_ == y.c_;
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  // Arbitrary but fixed total order, used only to make outputs canonical.
  static int cmp(const Scalar& a, const Scalar& b) {
    auto [x, y] = aligned(a, b);
    for (size_t i = 0; i < x.c_.size(); ++i) {
      if (x.c_[i] < y.c_[i]) return -1;
      if (x.c_[i] > y.c_[i]) return 1;
    }
    return 0;
  }

  // Canonical text form: terms in decreasing power order, spaced signs.
  std::string to_string() const {
    if (n_ == 1) return rat_to_string(c_[0]);
    std::string out;
    bool first = true;
    for (size_t k = c_.size(); k-- > 0;) {
      if (c_[k] == 0) continue;
      Rational v = c_[k];
      if (first) {
        if (v < 0) {
          out += "-";
          v = -v;
        }
        first = false;
      } else {
        out += v < 0 ? " - " : " + ";
        if (v < 0) v = -v;
      }
      std::string mono = k == 0 ? "" : (k == 1 ? zeta_name() : zeta_name() + "^" + std::to_string(k));
      if (k == 0)
        out += rat_to_string(v);
      else if (v == 1)
        out += mono;
      else
        out += rat_to_string(v) + "*" + mono;
    }
    if (first) out = "0";
    return out;
  }

  std::string zeta_name() const { return "zeta" + std::to_string(n_); }

  // Residue mod p for rational scalars; false for proper cyclotomics.
  bool mod(std::uint64_t p, std::uint64_t& out) const {
    if (n_ != 1) return false;
    return rat_mod(c_[0], p, out);
  }

 private:
  static std::pair<Scalar, Scalar> aligned(const Scalar& a, const Scalar& b) {
    if (a.n_ == b.n_) return {a, b};
    if (a.n_ == 1) return {promoted(a, b.n_), b};
    if (b.n_ == 1) return {a, promoted(b, a.n_)};
    fail_input("mixed cyclotomic levels " + std::to_string(a.n_) + " and " +
               std::to_string(b.n_));
  }

  static Scalar promoted(const Scalar& a, unsigned n) {
    const auto& f = detail::cyclo_field(n);
    Scalar s;
    s.n_ = n;
    s.c_.assign(f.deg, Rational(0));
    s.c_[0] = a.c_[0];
    return s;
  }

  void demote() {
    if (n_ == 1) return;
    for (size_t i = 1; i < c_.size(); ++i)
      if (c_[i] != 0) return;
    Rational v = c_[0];
    n_ = 1;
    c_.assign(1, v);
  }

  unsigned n_;
  std::vector<Rational> c_;
};

inline Scalar operator*(const Rational& a, const Scalar& b) { return Scalar(a) * b; }

}  // namespace etm
