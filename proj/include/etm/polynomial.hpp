#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etm/error.hpp"
#include "etm/scalar.hpp"
#include "etm/vartable.hpp"

namespace etm {

// Exponent vector, dense over the owning VarTable.
using Monomial = std::vector<std::uint32_t>;

inline unsigned mono_degree(const Monomial& m) {
  unsigned d = 0;
  for (auto e : m) d += e;
  return d;
}

// Graded lexicographic order: higher total degree first, ties broken by the
// earlier variable carrying the larger exponent.
inline int mono_cmp(const Monomial& a, const Monomial& b) {
  unsigned da = mono_degree(a), db = mono_degree(b);
  if (da != db) return da < db ? -1 : 1;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  return 0;
}

struct MonoGreater {
  bool operator()(const Monomial& a, const Monomial& b) const { return mono_cmp(a, b) > 0; }
};

// Sparse multivariate polynomial with Scalar coefficients. Terms are kept in
// decreasing monomial order, so begin() is the leading term, and zero
// coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, Scalar, MonoGreater>;

  Polynomial() = default;
  explicit Polynomial(VarTablePtr tab) : tab_(std::move(tab)) {}

  static Polynomial zero(VarTablePtr tab) { return Polynomial(std::move(tab)); }

  static Polynomial constant(VarTablePtr tab, const Scalar& c) {
    Polynomial p(std::move(tab));
    if (!c.is_zero()) p.terms_[Monomial(p.tab_->size(), 0)] = c;
    return p;
  }

  static Polynomial variable(VarTablePtr tab, size_t i, std::uint32_t e = 1) {
    Polynomial p(std::move(tab));
    Monomial m(p.tab_->size(), 0);
    m[i] = e;
    p.terms_[m] = Scalar(1);
    return p;
  }

  const VarTablePtr& table() const { return tab_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }

  unsigned degree() const {
    return terms_.empty() ? 0 : mono_degree(terms_.begin()->first);
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    unsigned d = mono_degree(terms_.begin()->first);
    for (const auto& [m, c] : terms_)
      if (mono_degree(m) != d) return false;
    return true;
  }

  const Monomial& leading_monomial() const {
    if (terms_.empty()) fail_internal("leading monomial of zero polynomial");
    return terms_.begin()->first;
  }

  const Scalar& leading_coeff() const {
    if (terms_.empty()) fail_internal("leading coefficient of zero polynomial");
    return terms_.begin()->second;
  }

  void add_term(const Monomial& m, const Scalar& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
    } else {
      it->second = it->second + c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    check_tables(a, b);
    Polynomial r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    check_tables(a, b);
    Polynomial r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
    return r;
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    check_tables(a, b);
    Polynomial r(a.tab_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m = ma;
        for (size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
        r.add_term(m, ca * cb);
      }
    return r;
  }

  friend Polynomial operator*(const Scalar& c, const Polynomial& p) {
    Polynomial r(p.tab_);
    if (c.is_zero()) return r;
    for (const auto& [m, pc] : p.terms_) r.terms_[m] = c * pc;
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return same_table(a.tab_, b.tab_) && a.terms_ == b.terms_;
  }

  // Divides by the leading coefficient; canonical representative of the line.
  Polynomial monic() const {
    if (terms_.empty()) return *this;
    return leading_coeff().inverse() * *this;
  }

  Polynomial pow(unsigned e) const {
    Polynomial acc = constant(tab_, Scalar(1)), b = *this;
    while (e) {
      if (e & 1) acc = acc * b;
      b = b * b;
      e >>= 1;
    }
    return acc;
  }

  // Full evaluation; every variable occurring in the polynomial must be
  // assigned. point is indexed by variable position.
  Scalar eval(const std::vector<std::optional<Scalar>>& point) const {
    require_input(point.size() == tab_->size(), "evaluation point has wrong arity");
    Scalar acc(0);
    for (const auto& [m, c] : terms_) {
      Scalar t = c;
      for (size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        if (!point[i])
          fail_input("missing assignment for variable '" + tab_->name(i) + "'");
        t = t * point[i]->pow(m[i]);
      }
      acc = acc + t;
    }
    return acc;
  }

  Scalar eval(const std::vector<Scalar>& point) const {
    std::vector<std::optional<Scalar>> p(point.begin(), point.end());
    return eval(p);
  }

  std::string to_string() const;

 private:
  static void check_tables(const Polynomial& a, const Polynomial& b) {
    if (!same_table(a.tab_, b.tab_))
      fail_input("polynomial operands use different variable tables");
  }

  VarTablePtr tab_;
  TermMap terms_;
};

// Substitutes an image polynomial (over a common target table) for every
// variable occurring in f. Missing images for occurring variables are errors.
inline Polynomial poly_substitute(const Polynomial& f, const VarTablePtr& target,
                                  const std::vector<std::optional<Polynomial>>& images) {
  require_input(images.size() == f.table()->size(), "substitution map has wrong arity");
  Polynomial out = Polynomial::zero(target);
  // cache powers per variable
  std::vector<std::vector<Polynomial>> pw(images.size());
  auto power_of = [&](size_t i, std::uint32_t e) -> const Polynomial& {
    auto& cache = pw[i];
    if (cache.empty()) {
      cache.push_back(Polynomial::constant(target, Scalar(1)));
      cache.push_back(*images[i]);
    }
    while (cache.size() <= e) cache.push_back(cache.back() * *images[i]);
    return cache[e];
  };
  for (const auto& [m, c] : f.terms()) {
    Polynomial t = Polynomial::constant(target, c);
    for (size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (!images[i])
        fail_input("no substitution image for variable '" + f.table()->name(i) + "'");
      t = t * power_of(i, m[i]);
    }
    out = out + t;
  }
  return out;
}

// Collects f as a polynomial in the aux variables: returns the nonzero
// coefficients, each paired with its aux monomial (entries on non-aux
// positions are zero), in decreasing aux-monomial order. The coefficient
// polynomials live over the same table with aux exponents cleared.
inline std::vector<std::pair<Monomial, Polynomial>> coeff_extract(
    const Polynomial& f, const std::vector<bool>& is_aux) {
  require_input(is_aux.size() == f.table()->size(), "aux mask has wrong arity");
  std::map<Monomial, Polynomial, MonoGreater> groups;
  for (const auto& [m, c] : f.terms()) {
    Monomial aux(m.size(), 0), rest(m.size(), 0);
    for (size_t i = 0; i < m.size(); ++i) (is_aux[i] ? aux[i] : rest[i]) = m[i];
    auto it = groups.find(aux);
    if (it == groups.end()) it = groups.emplace(aux, Polynomial::zero(f.table())).first;
    it->second.add_term(rest, c);
  }
  std::vector<std::pair<Monomial, Polynomial>> out;
  out.reserve(groups.size());
  for (auto& [m, p] : groups)
    if (!p.is_zero()) out.emplace_back(m, std::move(p));
  return out;
}

// Rewrites f over a different table. mapping[i] is the target index of source
// variable i, or -1 if it has none (such variables must not occur in f).
inline Polynomial poly_retable(const Polynomial& f, const VarTablePtr& target,
                               const std::vector<int>& mapping) {
  Polynomial out = Polynomial::zero(target);
  for (const auto& [m, c] : f.terms()) {
    Monomial t(target->size(), 0);
    for (size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (mapping[i] < 0)
        fail_input("variable '" + f.table()->name(i) + "' has no image in target table");
      t[mapping[i]] += m[i];
    }
    out.add_term(t, c);
  }
  return out;
}

// Matches variables by label. Labels present in f must exist in target.
inline Polynomial poly_retable_by_name(const Polynomial& f, const VarTablePtr& target) {
  std::vector<int> mapping(f.table()->size());
  for (size_t i = 0; i < mapping.size(); ++i) mapping[i] = target->find(f.table()->name(i));
  return poly_retable(f, target, mapping);
}

// ---- canonical text form ------------------------------------------------

inline std::string mono_to_string(const Monomial& m, const VarTable& tab) {
  std::string s;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += tab.name(i);
    if (m[i] > 1) s += "^" + std::to_string(m[i]);
  }
  return s;
}

inline std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    std::string mono = mono_to_string(m, *tab_);
    bool neg = false;
    std::string coef;
    if (c.is_rational()) {
      Rational v = c.as_rational();
      if (v < 0) {
        neg = true;
        v = -v;
      }
      bool unit = (v == 1);
      coef = (unit && !mono.empty()) ? "" : rat_to_string(v);
    } else {
      coef = "(" + c.to_string() + ")";
    }
    if (first) {
      out += neg ? "-" : "";
      first = false;
    } else {
      out += neg ? " - " : " + ";
    }
    if (coef.empty())
      out += mono;
    else if (mono.empty())
      out += coef;
    else
      out += coef + "*" + mono;
  }
  return out;
}

// ---- parser for the canonical grammar ------------------------------------
//
//   poly   := ['-'] term (('+'|'-') term)*        |  '0'
//   term   := factor ('*' factor)*
//   factor := rational | '(' cyclo ')' | var ['^' nat]
//   cyclo  := ['-'] cterm (('+'|'-') cterm)*
//   cterm  := rational ['*' zetaN ['^' nat]] | zetaN ['^' nat]
//   var    := ident | ident '[' tok (',' tok)* ']'
//
// Whitespace is permitted between tokens. Index tokens may contain any
// characters except ',' and ']'.

namespace detail {

struct PolyLexer {
  std::string s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  bool at_end() {
    skip_ws();
    return pos >= s.size();
  }

  std::string number() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
    if (start == pos) fail_input("expected number at position " + std::to_string(pos) +
                                 " in '" + s + "'");
    return s.substr(start, pos - start);
  }

  // identifier with optional bracketed index block, returned as full label
  std::string varref() {
    skip_ws();
    size_t start = pos;
    auto idch = [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
             (c >= '0' && c <= '9') || c == '_';
    };
    if (pos >= s.size() || !idch(s[pos]) || (s[pos] >= '0' && s[pos] <= '9'))
      fail_input("expected identifier at position " + std::to_string(pos) + " in '" + s + "'");
    while (pos < s.size() && idch(s[pos])) ++pos;
    std::string label = s.substr(start, pos - start);
    if (pos < s.size() && s[pos] == '[') {
      size_t close = s.find(']', pos);
      require_input(close != std::string::npos, "unterminated '[' in '" + s + "'");
      label += s.substr(pos, close - pos + 1);
      pos = close + 1;
    }
    return label;
  }
};

inline unsigned parse_nat(PolyLexer& lx) {
  std::string n = lx.number();
  require_input(n.find('/') == std::string::npos, "exponent must be an integer");
  return static_cast<unsigned>(std::stoul(n));
}

inline Scalar parse_cyclo(PolyLexer& lx) {
  Scalar acc(0);
  bool neg = lx.eat('-');
  for (;;) {
    Scalar term(1);
    char c = lx.peek();
    bool have_coef = false;
    if (c >= '0' && c <= '9') {
      term = Scalar(parse_rational(lx.number()));
      have_coef = true;
    }
    bool want_zeta = !have_coef;
    if (have_coef) want_zeta = lx.eat('*');
    if (want_zeta) {
      std::string id = lx.varref();
      require_input(id.rfind("zeta", 0) == 0 && id.size() > 4,
                    "expected zeta term in cyclotomic literal");
      unsigned n = static_cast<unsigned>(std::stoul(id.substr(4)));
      unsigned e = lx.eat('^') ? parse_nat(lx) : 1;
      term = term * Scalar::zeta(n).pow(e);
    }
    acc = acc + (neg ? -term : term);
    if (lx.eat('+')) {
      neg = false;
    } else if (lx.eat('-')) {
      neg = true;
    } else {
      break;
    }
  }
  return acc;
}

}  // namespace detail

inline Polynomial parse_polynomial(const std::string& text, const VarTablePtr& tab) {
  detail::PolyLexer lx{text};
  Polynomial out = Polynomial::zero(tab);
  if (lx.at_end()) fail_input("empty polynomial text");
  bool neg = lx.eat('-');
  for (;;) {
    Scalar coef(1);
    Monomial mono(tab->size(), 0);
    bool saw_factor = false;
    for (;;) {
      char c = lx.peek();
      if (c >= '0' && c <= '9') {
        coef = coef * Scalar(parse_rational(lx.number()));
        saw_factor = true;
      } else if (c == '(') {
        lx.eat('(');
        coef = coef * detail::parse_cyclo(lx);
        require_input(lx.eat(')'), "expected ')' in '" + text + "'");
        saw_factor = true;
      } else {
        std::string label = lx.varref();
        unsigned e = lx.eat('^') ? detail::parse_nat(lx) : 1;
        mono[tab->index_of(label)] += e;
        saw_factor = true;
      }
      if (!lx.eat('*')) break;
    }
    require_input(saw_factor, "empty term in '" + text + "'");
    out.add_term(mono, neg ? -coef : coef);
    if (lx.eat('+')) {
      neg = false;
    } else if (lx.eat('-')) {
      neg = true;
    } else {
      break;
    }
  }
  require_input(lx.at_end(), "trailing input in polynomial '" + text + "'");
  return out;
}

// ---- symbolic minors ------------------------------------------------------

inline Polynomial poly_mat_det(const std::vector<std::vector<Polynomial>>& m) {
  size_t n = m.size();
  if (n == 0) fail_input("determinant of empty matrix");
  if (n == 1) return m[0][0];
  Polynomial acc = Polynomial::zero(m[0][0].table());
  for (size_t j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    std::vector<std::vector<Polynomial>> sub;
    sub.reserve(n - 1);
    for (size_t r = 1; r < n; ++r) {
      std::vector<Polynomial> row;
      row.reserve(n - 1);
      for (size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[r][c]);
      sub.push_back(std::move(row));
    }
    Polynomial t = m[0][j] * poly_mat_det(sub);
    acc = (j % 2 == 0) ? acc + t : acc - t;
  }
  return acc;
}

// All r x r minors of a rectangular polynomial matrix, ordered by the (row
// subset, column subset) pair in lexicographic subset order.
inline std::vector<Polynomial> symbolic_minors(
    const std::vector<std::vector<Polynomial>>& m, unsigned r) {
  require_input(r >= 1, "minor size must be at least 1");
  size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  std::vector<Polynomial> out;
  if (r > rows || r > cols) return out;
  std::vector<size_t> ri(r), ci(r);
  for (size_t i = 0; i < r; ++i) ri[i] = i;
  auto advance = [](std::vector<size_t>& idx, size_t n) {
    size_t k = idx.size();
    for (size_t i = k; i-- > 0;) {
      if (idx[i] + (k - i) < n) {
        ++idx[i];
        for (size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        return true;
      }
    }
    return false;
  };
  do {
    for (size_t i = 0; i < r; ++i) ci[i] = i;
    do {
      std::vector<std::vector<Polynomial>> sub(r);
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) sub[i].push_back(m[ri[i]][ci[j]]);
      out.push_back(poly_mat_det(sub));
    } while (advance(ci, cols));
  } while (advance(ri, rows));
  return out;
}

}  // namespace etm
