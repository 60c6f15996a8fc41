#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etm/error.hpp"
#include "etm/group.hpp"
#include "etm/linalg.hpp"
#include "etm/scalar.hpp"

namespace etm {

// Irreducible representation given by one matrix per group element (indexed
// like FiniteGroup::element). Characters are the cached traces.
class Irrep {
 public:
  Irrep(std::string label, std::vector<Mat> mats)
      : label_(std::move(label)), mats_(std::move(mats)) {
    if (mats_.empty()) fail_internal("irrep with no matrices");
    chars_.reserve(mats_.size());
    for (const Mat& m : mats_) chars_.push_back(mat_trace(m));
  }

  const std::string& label() const { return label_; }
  void set_label(std::string l) { label_ = std::move(l); }
  std::size_t dim() const { return mats_[0].rows(); }
  const Mat& mat(std::uint32_t g) const { return mats_.at(g); }
  const Scalar& character(std::uint32_t g) const { return chars_.at(g); }
  const std::vector<Scalar>& characters() const { return chars_; }

  bool is_trivial() const {
    if (dim() != 1) return false;
    for (const Scalar& c : chars_)
      if (!c.is_one()) return false;
    return true;
  }

 private:
  std::string label_;
  std::vector<Mat> mats_;
  std::vector<Scalar> chars_;
};

namespace detail {

inline int permutation_parity(const Permutation& p) {
  std::vector<bool> seen(p.degree(), false);
  std::size_t cycles = 0;
  for (std::uint32_t s = 0; s < p.degree(); ++s) {
    if (seen[s]) continue;
    ++cycles;
    std::uint32_t x = s;
    while (!seen[x]) {
      seen[x] = true;
      x = p(x);
    }
  }
  return ((p.degree() - cycles) % 2 == 0) ? 1 : -1;
}

inline Mat permutation_matrix(const Permutation& p) {
  Mat m(p.degree(), p.degree());
  for (std::uint32_t j = 0; j < p.degree(); ++j) m(p(j), j) = Scalar(1);
  return m;
}

// Top-left r x r block of B^{-1} P B where the last columns of B span an
// invariant complement. Used for the standard representations of S_n.
inline Mat conjugated_block(const Mat& b, const Mat& binv, const Mat& p, std::size_t r) {
  Mat full = binv * (p * b);
  Mat out(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) out(i, j) = full(i, j);
  return out;
}

// Basis whose first n-1 columns are the differences e_i - e_{i+1} and whose
// last column is the all-ones vector.
inline Mat difference_basis(std::size_t n) {
  Mat b(n, n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    b(j, j) = Scalar(1);
    b(j + 1, j) = Scalar(-1);
  }
  for (std::size_t i = 0; i < n; ++i) b(i, n - 1) = Scalar(1);
  return b;
}

// All one-dimensional characters of an abelian group, obtained by extending
// candidate generator values (roots of unity of the right order) along the
// generator words and keeping those that define homomorphisms.
inline std::vector<Irrep> abelian_characters(const FiniteGroup& g) {
  std::size_t n = g.size();
  std::uint64_t expo = g.exponent();
  std::vector<std::uint32_t> gen_idx;
  for (const Permutation& p : g.generators()) gen_idx.push_back(g.index_of(p));
  Scalar zeta = expo == 1 ? Scalar(1) : Scalar::zeta(static_cast<std::uint32_t>(expo));

  std::vector<std::vector<Scalar>> found;
  std::vector<std::uint64_t> counter(gen_idx.size(), 0);
  while (true) {
    std::vector<Scalar> gen_val(gen_idx.size());
    for (std::size_t k = 0; k < gen_idx.size(); ++k) {
      std::uint64_t ord = g.order_of(gen_idx[k]);
      gen_val[k] = zeta.pow(counter[k] * (expo / ord));
    }
    std::vector<Scalar> val(n, Scalar(1));
    for (std::uint32_t i = 1; i < n; ++i) {
      Scalar v(1);
      for (std::uint32_t k : g.word(i)) v = v * gen_val[k];
      val[i] = v;
    }
    bool homo = true;
    for (std::uint32_t i = 0; i < n && homo; ++i)
      for (std::uint32_t j = 0; j < n; ++j)
        if (!(val[g.mult(i, j)] == val[i] * val[j])) {
          homo = false;
          break;
        }
    if (homo) {
      bool dup = false;
      for (const auto& seen : found)
        if (seen == val) {
          dup = true;
          break;
        }
      if (!dup) found.push_back(std::move(val));
    }
    std::size_t k = 0;
    for (; k < counter.size(); ++k) {
      counter[k]++;
      if (counter[k] < g.order_of(gen_idx[k])) break;
      counter[k] = 0;
    }
    if (k == counter.size()) break;
  }
  if (found.size() != n)
    fail_internal("abelian character enumeration found " +
                  std::to_string(found.size()) + " characters, expected " +
                  std::to_string(n));
  std::vector<Irrep> out;
  for (auto& val : found) {
    std::vector<Mat> mats;
    mats.reserve(n);
    for (const Scalar& v : val) {
      Mat m(1, 1);
      m(0, 0) = v;
      mats.push_back(std::move(m));
    }
    out.emplace_back("", std::move(mats));
  }
  return out;
}

// Searches for an isomorphism from h onto g by assigning images to the
// generators of h (matching element orders) and extending along generator
// words; the extension is accepted when it is bijective and respects the
// multiplication tables. Returns the element-index map h -> g.
inline std::optional<std::vector<std::uint32_t>> find_isomorphism(
    const FiniteGroup& h, const FiniteGroup& g) {
  if (h.size() != g.size()) return std::nullopt;
  std::size_t n = h.size();
  std::vector<std::uint32_t> hgen;
  for (const Permutation& p : h.generators()) hgen.push_back(h.index_of(p));
  std::vector<std::vector<std::uint32_t>> candidates(hgen.size());
  for (std::size_t k = 0; k < hgen.size(); ++k) {
    for (std::uint32_t c = 0; c < n; ++c)
      if (g.order_of(c) == h.order_of(hgen[k])) candidates[k].push_back(c);
    if (candidates[k].empty()) return std::nullopt;
  }

  std::vector<std::size_t> pick(hgen.size(), 0);
  while (true) {
    std::vector<std::uint32_t> image(hgen.size());
    for (std::size_t k = 0; k < hgen.size(); ++k) image[k] = candidates[k][pick[k]];
    std::vector<std::uint32_t> phi(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      std::vector<std::uint32_t> w = h.word(i);
      std::uint32_t t = 0;
      for (std::size_t k = w.size(); k-- > 0;) t = g.mult(image[w[k]], t);
      phi[i] = t;
    }
    std::vector<bool> hit(n, false);
    bool ok = true;
    for (std::uint32_t v : phi) {
      if (hit[v]) {
        ok = false;
        break;
      }
      hit[v] = true;
    }
    if (ok)
      for (std::uint32_t i = 0; i < n && ok; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
          if (phi[h.mult(i, j)] != g.mult(phi[i], phi[j])) {
            ok = false;
            break;
          }
    if (ok) return phi;
    std::size_t k = 0;
    for (; k < pick.size(); ++k) {
      pick[k]++;
      if (pick[k] < candidates[k].size()) break;
      pick[k] = 0;
    }
    if (k == pick.size()) return std::nullopt;
  }
}

inline std::vector<Irrep> symmetric3_irreps(const FiniteGroup& s3) {
  std::size_t n = s3.size();
  Mat b = difference_basis(3);
  Mat binv = *mat_inverse(b);
  std::vector<Mat> triv, sgn, std2;
  for (std::uint32_t i = 0; i < n; ++i) {
    const Permutation& p = s3.element(i);
    Mat one(1, 1), par(1, 1);
    one(0, 0) = Scalar(1);
    par(0, 0) = Scalar(permutation_parity(p));
    triv.push_back(one);
    sgn.push_back(par);
    std2.push_back(conjugated_block(b, binv, permutation_matrix(p), 2));
  }
  std::vector<Irrep> out;
  out.emplace_back("", std::move(triv));
  out.emplace_back("", std::move(sgn));
  out.emplace_back("", std::move(std2));
  return out;
}

inline std::vector<Irrep> dihedral8_irreps(const FiniteGroup& d4,
                                           std::uint32_t r, std::uint32_t s) {
  std::size_t n = d4.size();
  // Decompose every element as r^i s^j.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> decomp(n);
  {
    std::vector<bool> done(n, false);
    std::uint32_t ri = 0;
    for (std::uint32_t i = 0; i < 4; ++i) {
      std::uint32_t x = ri;
      decomp[x] = {i, 0};
      done[x] = true;
      std::uint32_t xs = d4.mult(x, s);
      decomp[xs] = {i, 1};
      done[xs] = true;
      ri = d4.mult(ri, r);
    }
    for (bool f : done)
      if (!f) fail_internal("dihedral decomposition incomplete");
  }
  Mat rmat(2, 2), smat(2, 2);
  rmat(0, 1) = Scalar(-1);
  rmat(1, 0) = Scalar(1);
  smat(0, 0) = Scalar(-1);
  smat(1, 1) = Scalar(1);
  std::vector<Irrep> out;
  for (int a : {1, -1})
    for (int c : {1, -1}) {
      std::vector<Mat> mats;
      for (std::uint32_t i = 0; i < n; ++i) {
        Mat m(1, 1);
        int v = 1;
        for (std::uint32_t k = 0; k < decomp[i].first; ++k) v *= a;
        if (decomp[i].second) v *= c;
        m(0, 0) = Scalar(v);
        mats.push_back(std::move(m));
      }
      out.emplace_back("", std::move(mats));
    }
  std::vector<Mat> two;
  for (std::uint32_t i = 0; i < n; ++i) {
    Mat m = Mat::identity(2);
    for (std::uint32_t k = 0; k < decomp[i].first; ++k) m = m * rmat;
    if (decomp[i].second) m = m * smat;
    two.push_back(std::move(m));
  }
  out.emplace_back("", std::move(two));
  return out;
}

inline std::vector<Irrep> symmetric4_irreps(const FiniteGroup& s4) {
  std::size_t n = s4.size();
  Mat b4 = difference_basis(4);
  Mat b4inv = *mat_inverse(b4);
  Mat b3 = difference_basis(3);
  Mat b3inv = *mat_inverse(b3);
  std::vector<Mat> triv, sgn, two, std3, std3s;
  for (std::uint32_t i = 0; i < n; ++i) {
    const Permutation& p = s4.element(i);
    int parity = permutation_parity(p);
    Mat one(1, 1), par(1, 1);
    one(0, 0) = Scalar(1);
    par(0, 0) = Scalar(parity);
    triv.push_back(one);
    sgn.push_back(par);
    // Action on the three pairings {0k | rest}: the image pairing joins
    // p(0) and p(k); its index is the point paired with 0 in the image.
    Permutation q;
    q.img.resize(3);
    for (std::uint32_t k = 1; k <= 3; ++k) {
      std::uint32_t a = p(0), c = p(k), idx;
      if (a == 0)
        idx = c;
      else if (c == 0)
        idx = a;
      else
        idx = 6 - a - c;  // the point outside {0, a, c}
      q.img[k - 1] = idx - 1;
    }
    two.push_back(conjugated_block(b3, b3inv, permutation_matrix(q), 2));
    Mat st = conjugated_block(b4, b4inv, permutation_matrix(p), 3);
    std3s.push_back(Scalar(parity) * st);
    std3.push_back(std::move(st));
  }
  std::vector<Irrep> out;
  out.emplace_back("", std::move(triv));
  out.emplace_back("", std::move(sgn));
  out.emplace_back("", std::move(two));
  out.emplace_back("", std::move(std3));
  out.emplace_back("", std::move(std3s));
  return out;
}

inline std::vector<Irrep> transported_irreps(const FiniteGroup& g,
                                             const FiniteGroup& h,
                                             std::vector<Irrep> (*build)(const FiniteGroup&)) {
  auto phi = find_isomorphism(h, g);
  if (!phi) return {};
  std::vector<std::uint32_t> phi_inv(g.size());
  for (std::uint32_t i = 0; i < g.size(); ++i) phi_inv[(*phi)[i]] = i;
  std::vector<Irrep> base = build(h);
  std::vector<Irrep> out;
  for (const Irrep& ir : base) {
    std::vector<Mat> mats;
    mats.reserve(g.size());
    for (std::uint32_t i = 0; i < g.size(); ++i) mats.push_back(ir.mat(phi_inv[i]));
    out.emplace_back("", std::move(mats));
  }
  return out;
}

inline int scalar_vec_cmp(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    int c = Scalar::cmp(a[i], b[i]);
    if (c != 0) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

}  // namespace detail

// Validates an irrep list against the group (homomorphy, identity image,
// exact character orthogonality, completeness), sorts it canonically
// (trivial first, then by dimension and character), and optionally assigns
// the standard labels: "t" for trivial, "s" for a unique nontrivial
// {1,-1}-valued character, "w1","w2",... for the other one-dimensional
// characters, and per-dimension letters "e","f","g","h" (with numeric
// suffixes on ties) for higher dimensions.
inline std::vector<Irrep> canonical_irreps(const FiniteGroup& g,
                                           std::vector<Irrep> raw,
                                           bool relabel) {
  std::size_t n = g.size();
  if (raw.empty()) fail_input("empty irrep table");
  std::size_t dimsq = 0;
  for (const Irrep& ir : raw) {
    if (ir.characters().size() != n)
      fail_input("irrep table entry does not cover every group element");
    for (std::uint32_t i = 0; i < n; ++i)
      if (ir.mat(i).rows() != ir.dim() || ir.mat(i).cols() != ir.dim())
        fail_input("irrep matrices have inconsistent dimensions");
    if (!(ir.mat(0) == Mat::identity(ir.dim())))
      fail_input("irrep does not map the identity element to the identity matrix");
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < n; ++j)
        if (!(ir.mat(i) * ir.mat(j) == ir.mat(g.mult(i, j))))
          fail_input("irrep matrices do not respect the multiplication table");
    dimsq += ir.dim() * ir.dim();
  }
  if (dimsq != n)
    fail_input("irrep table incomplete: squared dimensions sum to " +
               std::to_string(dimsq) + ", group order is " + std::to_string(n));
  Scalar order(static_cast<long>(n));
  for (std::size_t a = 0; a < raw.size(); ++a)
    for (std::size_t b = 0; b < raw.size(); ++b) {
      Scalar sum(0);
      for (std::uint32_t i = 0; i < n; ++i)
        sum = sum + raw[a].character(i) * raw[b].character(g.inv(i));
      Scalar expect(a == b ? 1 : 0);
      if (!(sum == expect * order))
        fail_input("irrep characters are not orthonormal");
    }
  std::size_t trivials = 0;
  for (const Irrep& ir : raw)
    if (ir.is_trivial()) ++trivials;
  if (trivials != 1)
    fail_input("irrep table must contain the trivial representation exactly once");

  std::sort(raw.begin(), raw.end(), [](const Irrep& a, const Irrep& b) {
    if (a.is_trivial() != b.is_trivial()) return a.is_trivial();
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    return detail::scalar_vec_cmp(a.characters(), b.characters()) < 0;
  });

  if (relabel) {
    auto sign_like = [](const Irrep& ir) {
      if (ir.dim() != 1 || ir.is_trivial()) return false;
      for (const Scalar& c : ir.characters())
        if (!(c == Scalar(1) || c == Scalar(-1))) return false;
      return true;
    };
    std::size_t sign_count = 0;
    for (const Irrep& ir : raw)
      if (sign_like(ir)) ++sign_count;
    std::size_t windex = 1;
    std::vector<std::size_t> dim_count(32, 0), dim_seen(32, 0);
    for (const Irrep& ir : raw)
      if (ir.dim() >= 2 && ir.dim() < 32) dim_count[ir.dim()]++;
    for (Irrep& ir : raw) {
      if (ir.is_trivial()) {
        ir.set_label("t");
      } else if (ir.dim() == 1) {
        if (sign_count == 1 && sign_like(ir))
          ir.set_label("s");
        else
          ir.set_label("w" + std::to_string(windex++));
      } else {
        static const char* letters = "efgh";
        std::string base = ir.dim() <= 5 ? std::string(1, letters[ir.dim() - 2])
                                         : "r" + std::to_string(ir.dim());
        std::size_t d = ir.dim() < 32 ? ir.dim() : 31;
        dim_seen[d]++;
        ir.set_label(dim_count[d] > 1 ? base + std::to_string(dim_seen[d]) : base);
      }
    }
  } else {
    std::vector<std::string> seen;
    for (const Irrep& ir : raw) {
      if (ir.label().empty()) fail_input("user irrep table entries need labels");
      if (std::find(seen.begin(), seen.end(), ir.label()) != seen.end())
        fail_input("duplicate irrep label '" + ir.label() + "'");
      seen.push_back(ir.label());
    }
  }
  return raw;
}

// Built-in irrep tables: every abelian group (characters over Q(zeta_N) with
// N the exponent), and the non-abelian groups S3, the dihedral group of
// order 8, and S4, recognised up to isomorphism. Anything else needs a
// user-supplied table.
inline std::vector<Irrep> builtin_irreps(const FiniteGroup& g) {
  std::vector<Irrep> raw;
  if (g.abelian()) {
    raw = detail::abelian_characters(g);
  } else if (g.size() == 6) {
    FiniteGroup s3 = FiniteGroup::from_generators(
        {"0", "1", "2"}, {parse_cycles({"0", "1", "2"}, "(0 1)"),
                          parse_cycles({"0", "1", "2"}, "(0 1 2)")});
    raw = detail::transported_irreps(g, s3, detail::symmetric3_irreps);
  } else if (g.size() == 8) {
    std::vector<std::string> pts{"0", "1", "2", "3"};
    FiniteGroup d4 = FiniteGroup::from_generators(
        pts, {parse_cycles(pts, "(0 1 2 3)"), parse_cycles(pts, "(0 2)")});
    auto phi = detail::find_isomorphism(d4, g);
    if (phi) {
      std::vector<Irrep> base = detail::dihedral8_irreps(
          d4, d4.index_of(parse_cycles(pts, "(0 1 2 3)")),
          d4.index_of(parse_cycles(pts, "(0 2)")));
      std::vector<std::uint32_t> phi_inv(g.size());
      for (std::uint32_t i = 0; i < g.size(); ++i) phi_inv[(*phi)[i]] = i;
      for (const Irrep& ir : base) {
        std::vector<Mat> mats;
        for (std::uint32_t i = 0; i < g.size(); ++i) mats.push_back(ir.mat(phi_inv[i]));
        raw.emplace_back("", std::move(mats));
      }
    }
  } else if (g.size() == 24) {
    std::vector<std::string> pts{"0", "1", "2", "3"};
    FiniteGroup s4 = FiniteGroup::from_generators(
        pts, {parse_cycles(pts, "(0 1)"), parse_cycles(pts, "(0 1 2 3)")});
    raw = detail::transported_irreps(g, s4, detail::symmetric4_irreps);
  }
  if (raw.empty())
    fail_input("no built-in irreducible representation table for this group "
               "(non-abelian, order " + std::to_string(g.size()) +
               "); supply irrep matrices in the input");
  return canonical_irreps(g, std::move(raw), true);
}

inline const Irrep& find_irrep(const std::vector<Irrep>& irreps,
                               const std::string& label) {
  for (const Irrep& ir : irreps)
    if (ir.label() == label) return ir;
  fail_input("unknown irrep label '" + label + "'");
}

}  // namespace etm
