#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "etm/error.hpp"

namespace etm {

// Permutation of {0, ..., n-1}, stored as the image vector.
struct Permutation {
  std::vector<std::uint32_t> img;

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.img.resize(n);
    std::iota(p.img.begin(), p.img.end(), 0u);
    return p;
  }

  std::size_t degree() const { return img.size(); }
  std::uint32_t operator()(std::uint32_t point) const { return img.at(point); }

  bool is_identity() const {
    for (std::uint32_t i = 0; i < img.size(); ++i)
      if (img[i] != i) return false;
    return true;
  }

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.img == b.img;
  }
  friend bool operator<(const Permutation& a, const Permutation& b) {
    return a.img < b.img;
  }
};

inline bool is_valid_permutation(const Permutation& p) {
  std::vector<bool> seen(p.img.size(), false);
  for (std::uint32_t v : p.img) {
    if (v >= p.img.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

// Composition acts on the right argument first: (a*b)(x) = a(b(x)).
inline Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.degree() != b.degree()) fail_internal("permutation degree mismatch");
  Permutation r;
  r.img.resize(a.degree());
  for (std::uint32_t x = 0; x < b.degree(); ++x) r.img[x] = a(b(x));
  return r;
}

inline Permutation inverse(const Permutation& p) {
  Permutation r;
  r.img.resize(p.degree());
  for (std::uint32_t x = 0; x < p.degree(); ++x) r.img[p(x)] = x;
  return r;
}

// Parses cycle notation over a label alphabet, e.g. "(A C G T)(X Y)" or
// "(A,C,G,T)". Labels are separated by whitespace or commas. An empty string,
// "e", or "()" denotes the identity. When several cycles share a point the
// rightmost cycle acts first.
inline Permutation parse_cycles(const std::vector<std::string>& labels,
                                const std::string& text) {
  std::map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], i).second)
      fail_input("duplicate label '" + labels[i] + "' in label set");
  }
  std::vector<std::vector<std::uint32_t>> cycles;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  if (pos < text.size() && text[pos] == 'e' ) {
    ++pos;
    skip_ws();
    if (pos != text.size()) fail_input("unexpected text after 'e' in permutation '" + text + "'");
    return Permutation::identity(labels.size());
  }
  while (pos < text.size()) {
    if (text[pos] != '(')
      fail_input("expected '(' in permutation '" + text + "'");
    ++pos;
    std::vector<std::uint32_t> cycle;
    while (true) {
      skip_ws();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        skip_ws();
      }
      if (pos >= text.size())
        fail_input("unterminated cycle in permutation '" + text + "'");
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      std::size_t start = pos;
      while (pos < text.size() && text[pos] != ',' && text[pos] != ')' &&
             text[pos] != '(' &&
             !std::isspace(static_cast<unsigned char>(text[pos])))
        ++pos;
      std::string label = text.substr(start, pos - start);
      auto it = index.find(label);
      if (it == index.end())
        fail_input("unknown label '" + label + "' in permutation '" + text + "'");
      if (std::find(cycle.begin(), cycle.end(), it->second) != cycle.end())
        fail_input("label '" + label + "' repeated within a cycle in '" + text + "'");
      cycle.push_back(it->second);
    }
    if (cycle.size() > 1) cycles.push_back(std::move(cycle));
    skip_ws();
  }
  Permutation result = Permutation::identity(labels.size());
  for (auto it = cycles.rbegin(); it != cycles.rend(); ++it) {
    Permutation c = Permutation::identity(labels.size());
    const auto& cy = *it;
    for (std::size_t k = 0; k < cy.size(); ++k)
      c.img[cy[k]] = cy[(k + 1) % cy.size()];
    result = compose(c, result);
  }
  return result;
}

inline std::string format_cycles(const std::vector<std::string>& labels,
                                 const Permutation& p) {
  if (p.degree() != labels.size()) fail_internal("permutation degree mismatch");
  if (p.is_identity()) return "e";
  std::string out;
  std::vector<bool> seen(p.degree(), false);
  for (std::uint32_t start = 0; start < p.degree(); ++start) {
    if (seen[start] || p(start) == start) continue;
    out += '(';
    std::uint32_t x = start;
    bool first = true;
    do {
      if (!first) out += ' ';
      out += labels[x];
      seen[x] = true;
      x = p(x);
      first = false;
    } while (x != start);
    out += ')';
  }
  return out;
}

// Finite permutation group over a fixed label alphabet. Elements are closed
// under the generators, sorted lexicographically by image vector (which puts
// the identity first), and indexed against precomputed multiplication and
// inverse tables. Every non-identity element carries one generator word used
// to extend data given on generators (matrices, character values) to the
// whole group.
class FiniteGroup {
 public:
  static FiniteGroup from_generators(std::vector<std::string> labels,
                                     std::vector<Permutation> gens) {
    for (const Permutation& g : gens) {
      if (g.degree() != labels.size())
        fail_input("generator degree does not match the label set");
      if (!is_valid_permutation(g))
        fail_input("generator is not a permutation");
    }
    FiniteGroup G;
    G.labels_ = std::move(labels);
    G.gens_ = std::move(gens);
    G.close();
    return G;
  }

  static FiniteGroup trivial(std::vector<std::string> labels) {
    return from_generators(std::move(labels), {});
  }

  std::size_t size() const { return elements_.size(); }
  std::size_t degree() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::uint32_t point) const { return labels_.at(point); }
  const std::vector<Permutation>& elements() const { return elements_; }
  const Permutation& element(std::uint32_t i) const { return elements_.at(i); }
  const std::vector<Permutation>& generators() const { return gens_; }

  std::uint32_t index_of(const Permutation& p) const {
    auto it = index_.find(p.img);
    if (it == index_.end()) fail_internal("permutation is not a group element");
    return it->second;
  }

  std::uint32_t mult(std::uint32_t i, std::uint32_t j) const {
    return mult_[i * size() + j];
  }
  std::uint32_t inv(std::uint32_t i) const { return inv_.at(i); }
  std::uint32_t order_of(std::uint32_t i) const { return order_.at(i); }
  std::uint64_t exponent() const { return exponent_; }
  bool abelian() const { return abelian_; }

  std::uint32_t apply(std::uint32_t i, std::uint32_t point) const {
    return elements_.at(i)(point);
  }

  // Generator word of element i: the element equals the composition of the
  // listed generators, rightmost applied first.
  std::vector<std::uint32_t> word(std::uint32_t i) const {
    std::vector<std::uint32_t> w;
    while (i != 0) {
      w.push_back(via_.at(i));
      i = parent_.at(i);
    }
    return w;
  }

  std::vector<std::uint32_t> all_indices() const {
    std::vector<std::uint32_t> v(size());
    std::iota(v.begin(), v.end(), 0u);
    return v;
  }

  std::string element_name(std::uint32_t i) const {
    return format_cycles(labels_, elements_.at(i));
  }

  // Orbits on points, each sorted ascending, listed by smallest member.
  std::vector<std::vector<std::uint32_t>> orbits() const {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<bool> seen(degree(), false);
    for (std::uint32_t start = 0; start < degree(); ++start) {
      if (seen[start]) continue;
      std::vector<std::uint32_t> orbit;
      for (const Permutation& g : elements_) {
        std::uint32_t y = g(start);
        if (!seen[y]) {
          seen[y] = true;
          orbit.push_back(y);
        }
      }
      std::sort(orbit.begin(), orbit.end());
      out.push_back(std::move(orbit));
    }
    return out;
  }

  // Element indices of the stabiliser subgroup of a point.
  std::vector<std::uint32_t> stabilizer(std::uint32_t point) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < size(); ++i)
      if (apply(i, point) == point) out.push_back(i);
    return out;
  }

 private:
  void close() {
    std::vector<Permutation> elems{Permutation::identity(degree())};
    std::map<std::vector<std::uint32_t>, std::uint32_t> idx{{elems[0].img, 0}};
    std::vector<std::int64_t> parent{-1};
    std::vector<std::uint32_t> via{0};
    for (std::size_t head = 0; head < elems.size(); ++head) {
      for (std::uint32_t k = 0; k < gens_.size(); ++k) {
        Permutation next = compose(gens_[k], elems[head]);
        if (idx.emplace(next.img, elems.size()).second) {
          elems.push_back(std::move(next));
          parent.push_back(static_cast<std::int64_t>(head));
          via.push_back(k);
        }
      }
    }
    std::vector<std::uint32_t> by_rank(elems.size());
    std::iota(by_rank.begin(), by_rank.end(), 0u);
    std::sort(by_rank.begin(), by_rank.end(), [&](std::uint32_t a, std::uint32_t b) {
      return elems[a].img < elems[b].img;
    });
    std::vector<std::uint32_t> new_of_old(elems.size());
    for (std::uint32_t n = 0; n < by_rank.size(); ++n) new_of_old[by_rank[n]] = n;

    elements_.resize(elems.size());
    parent_.resize(elems.size());
    via_.resize(elems.size());
    for (std::uint32_t old = 0; old < elems.size(); ++old) {
      std::uint32_t now = new_of_old[old];
      elements_[now] = std::move(elems[old]);
      parent_[now] = parent[old] < 0 ? 0 : new_of_old[static_cast<std::uint32_t>(parent[old])];
      via_[now] = via[old];
    }
    index_.clear();
    for (std::uint32_t i = 0; i < elements_.size(); ++i)
      index_.emplace(elements_[i].img, i);

    std::size_t n = elements_.size();
    mult_.resize(n * n);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < n; ++j)
        mult_[i * n + j] = index_.at(compose(elements_[i], elements_[j]).img);
    inv_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
      inv_[i] = index_.at(inverse(elements_[i]).img);
    order_.resize(n);
    exponent_ = 1;
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t ord = 1, x = i;
      while (x != 0) {
        x = mult(x, i);
        ++ord;
      }
      order_[i] = ord;
      exponent_ = std::lcm(exponent_, static_cast<std::uint64_t>(ord));
    }
    abelian_ = true;
    for (std::uint32_t i = 0; i < n && abelian_; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j)
        if (mult(i, j) != mult(j, i)) {
          abelian_ = false;
          break;
        }
  }

  std::vector<std::string> labels_;
  std::vector<Permutation> gens_;
  std::vector<Permutation> elements_;
  std::map<std::vector<std::uint32_t>, std::uint32_t> index_;
  std::vector<std::uint32_t> mult_, inv_, order_;
  std::vector<std::uint32_t> parent_, via_;
  std::uint64_t exponent_ = 1;
  bool abelian_ = true;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

inline GroupPtr make_group(std::vector<std::string> labels,
                           std::vector<Permutation> gens) {
  return std::make_shared<const FiniteGroup>(
      FiniteGroup::from_generators(std::move(labels), std::move(gens)));
}

inline GroupPtr make_group(std::vector<std::string> labels,
                           const std::vector<std::string>& cycle_strings) {
  std::vector<Permutation> gens;
  gens.reserve(cycle_strings.size());
  for (const std::string& s : cycle_strings) gens.push_back(parse_cycles(labels, s));
  return make_group(std::move(labels), std::move(gens));
}

}  // namespace etm
