#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "etm/blocks.hpp"
#include "etm/coords.hpp"
#include "etm/error.hpp"
#include "etm/irreps.hpp"
#include "etm/linalg.hpp"
#include "etm/model.hpp"
#include "etm/polynomial.hpp"
#include "etm/rng.hpp"
#include "etm/tensor.hpp"
#include "etm/tree.hpp"

namespace etm {

// ---- generator sets ----------------------------------------------------

// Polynomials cutting out a model, each with a provenance tag telling which
// construction produced it: star-input, minor, contracted, oracle or
// pullback.
struct GeneratorSet {
  VarTablePtr table;
  std::vector<Polynomial> polys;
  std::vector<std::string> tags;

  void add(Polynomial p, std::string tag) {
    if (p.is_zero()) return;
    polys.push_back(std::move(p));
    tags.push_back(std::move(tag));
  }

  std::size_t size() const { return polys.size(); }
};

// Deterministic total order on polynomials over one table: by degree, then
// term by term.
inline bool poly_less(const Polynomial& a, const Polynomial& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  auto ia = a.terms().begin(), ib = b.terms().begin();
  while (ia != a.terms().end() && ib != b.terms().end()) {
    int c = mono_cmp(ia->first, ib->first);
    if (c != 0) return c > 0;
    int sc = Scalar::cmp(ia->second, ib->second);
    if (sc != 0) return sc < 0;
    ++ia;
    ++ib;
  }
  return a.term_count() < b.term_count();
}

// Monic generators, sorted and deduplicated. Duplicates keep the tag of the
// first occurrence.
inline void canonicalize(GeneratorSet& g) {
  std::vector<std::pair<Polynomial, std::string>> items;
  items.reserve(g.polys.size());
  for (std::size_t i = 0; i < g.polys.size(); ++i) {
    if (g.polys[i].is_zero()) continue;
    items.emplace_back(g.polys[i].monic(), g.tags[i]);
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return poly_less(a.first, b.first); });
  g.polys.clear();
  g.tags.clear();
  for (auto& [p, tag] : items) {
    if (!g.polys.empty() && g.polys.back() == p) continue;
    g.polys.push_back(std::move(p));
    g.tags.push_back(std::move(tag));
  }
}

// Appends `more` to `into`, matching variables by label.
inline void merge_into(GeneratorSet& into, const GeneratorSet& more) {
  for (std::size_t i = 0; i < more.polys.size(); ++i)
    into.add(poly_retable_by_name(more.polys[i], into.table), more.tags[i]);
}

inline bool all_vanish(const GeneratorSet& g, const std::vector<Scalar>& point) {
  for (const Polynomial& p : g.polys)
    if (!p.eval(point).is_zero()) return false;
  return true;
}

// ---- monomial grids and graded spans ------------------------------------

// All monomials of exact total degree d in n variables, in decreasing graded
// lexicographic order (the polynomial term order).
inline std::vector<Monomial> monomial_grid(std::size_t nvars, unsigned d) {
  if (nvars == 0) fail_internal("monomial grid over an empty table");
  std::vector<Monomial> out;
  Monomial cur(nvars, 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i + 1 == nvars) {
      cur[i] = left;
      out.push_back(cur);
      cur[i] = 0;
      return;
    }
    for (unsigned e = left + 1; e-- > 0;) {
      cur[i] = e;
      rec(i + 1, left - e);
    }
    cur[i] = 0;
  };
  rec(0, d);
  return out;
}

namespace detail {

inline std::map<Monomial, std::size_t, MonoGreater> grid_index(
    const std::vector<Monomial>& grid) {
  std::map<Monomial, std::size_t, MonoGreater> at;
  for (std::size_t i = 0; i < grid.size(); ++i) at.emplace(grid[i], i);
  return at;
}

inline void grid_row(const Polynomial& p,
                     const std::map<Monomial, std::size_t, MonoGreater>& at,
                     std::vector<Scalar>& row) {
  for (const auto& [mono, c] : p.terms()) row[at.at(mono)] = c;
}

}  // namespace detail

// The degree-d slice of the ideal generated by `gens`: every generator of
// degree e <= d times all monomials of degree d - e, as a row space over the
// degree-d monomial grid. Generators must be homogeneous.
inline RowSpace graded_component(const std::vector<Polynomial>& gens,
                                 const VarTablePtr& table, unsigned d) {
  std::vector<Monomial> grid = monomial_grid(table->size(), d);
  auto at = detail::grid_index(grid);
  RowSpace space(grid.size());
  for (const Polynomial& g : gens) {
    if (g.is_zero()) continue;
    require_input(g.is_homogeneous(), "graded component needs homogeneous generators");
    if (g.degree() > d) continue;
    for (const Monomial& m : monomial_grid(table->size(), d - g.degree())) {
      Polynomial shift = Polynomial::zero(table);
      shift.add_term(m, Scalar(1));
      std::vector<Scalar> row(grid.size(), Scalar(0));
      detail::grid_row(g * shift, at, row);
      space.insert(std::move(row));
    }
  }
  return space;
}

// Exact equality of the degree-d components of the two generated ideals.
inline bool graded_spans_equal(const std::vector<Polynomial>& a,
                               const std::vector<Polynomial>& b,
                               const VarTablePtr& table, unsigned d) {
  RowSpace sa = graded_component(a, table, d);
  RowSpace sb = graded_component(b, table, d);
  if (sa.rank() != sb.rank()) return false;
  std::vector<Monomial> grid = monomial_grid(table->size(), d);
  auto at = detail::grid_index(grid);
  RowSpace joint = sa;
  for (const Polynomial& g : b) {
    if (g.is_zero() || g.degree() > d) continue;
    for (const Monomial& m : monomial_grid(table->size(), d - g.degree())) {
      Polynomial shift = Polynomial::zero(table);
      shift.add_term(m, Scalar(1));
      std::vector<Scalar> row(grid.size(), Scalar(0));
      detail::grid_row(g * shift, at, row);
      if (joint.insert(std::move(row))) return false;
    }
  }
  return true;
}

// ---- sampling oracle -----------------------------------------------------

// A deterministic stream of coordinate vectors of model points; entry k does
// not depend on how many entries were requested before it.
struct SampleSource {
  std::size_t width = 0;
  std::function<std::vector<Scalar>(std::size_t)> at;
};

// Invariant coordinates of the parametrisation at seeded random equivariant
// representations.
inline SampleSource tree_sample_source(const SpacedTree& t, const CoordSystem& cs,
                                       std::uint64_t seed) {
  auto cache = std::make_shared<std::vector<std::vector<Scalar>>>();
  SpacedTree tree = t;
  CoordSystem sys = cs;
  return {sys.dim(), [cache, tree, sys, seed](std::size_t k) {
            while (cache->size() <= k) {
              std::uint64_t s =
                  Rng::derive(seed, "oracle:" + std::to_string(cache->size()));
              TreeRepresentation a = random_representation(tree, s, true);
              cache->push_back(sys.coords_of(psi(tree, a)));
            }
            return (*cache)[k];
          }};
}

namespace detail {

// Evaluates every grid monomial at the sample point, with per-variable power
// tables.
inline std::vector<Scalar> monomial_row(const std::vector<Monomial>& grid,
                                        const std::vector<Scalar>& z) {
  std::vector<std::vector<Scalar>> pw(z.size());
  auto power = [&](std::size_t i, std::uint32_t e) -> const Scalar& {
    auto& cache = pw[i];
    if (cache.empty()) cache.push_back(Scalar(1));
    while (cache.size() <= e) cache.push_back(cache.back() * z[i]);
    return cache[e];
  };
  std::vector<Scalar> row;
  row.reserve(grid.size());
  for (const Monomial& m : grid) {
    Scalar acc(1);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] > 0) acc = acc * power(i, m[i]);
    row.push_back(acc);
  }
  return row;
}

// Modular rank tracker for sample rows. Decides when sampling may stop and
// hands out the mod-p kernel, which the caller lifts to exact rationals and
// certifies. Rows with entries outside the rationals report failure and the
// caller switches to an exact tracker.
class RankProbe {
 public:
  explicit RankProbe(std::size_t width) : width_(width) {}

  // 1 rank grew, 0 rank unchanged, -1 row is not rational.
  int try_insert(const std::vector<Scalar>& row) {
    std::vector<std::uint64_t> r(width_);
    for (std::size_t j = 0; j < width_; ++j)
      if (!row[j].mod(p_, r[j])) return -1;
    return insert_mod(std::move(r)) ? 1 : 0;
  }

  std::uint64_t prime() const { return p_; }
  std::size_t rank() const { return rows_.size(); }

  // Kernel basis mod p, one vector per non-pivot column of the reduced
  // echelon form, with a 1 in that column.
  std::vector<std::vector<std::uint64_t>> kernel_mod() {
    std::sort(rows_.begin(), rows_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = rows_.size(); i-- > 0;) {
      std::size_t lead = rows_[i].first;
      for (std::size_t r = 0; r < i; ++r) {
        std::uint64_t f = rows_[r].second[lead];
        if (f == 0) continue;
        for (std::size_t j = lead; j < width_; ++j)
          rows_[r].second[j] =
              (rows_[r].second[j] + p_ - mulmod(f, rows_[i].second[j], p_)) % p_;
      }
    }
    std::vector<char> pivot(width_, 0);
    for (const auto& [lead, row] : rows_) pivot[lead] = 1;
    std::vector<std::vector<std::uint64_t>> out;
    for (std::size_t f = 0; f < width_; ++f) {
      if (pivot[f]) continue;
      std::vector<std::uint64_t> v(width_, 0);
      v[f] = 1;
      for (const auto& [lead, row] : rows_) v[lead] = (p_ - row[f]) % p_;
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  static std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return (a * b) % p;  // operands stay below 2^31
  }

  static std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mulmod(r, a, p);
      a = mulmod(a, a, p);
      e >>= 1;
    }
    return r;
  }

  bool insert_mod(std::vector<std::uint64_t> v) {
    for (const auto& [lead, row] : rows_) {
      if (v[lead] == 0) continue;
      std::uint64_t f = v[lead];
      for (std::size_t j = lead; j < width_; ++j)
        v[j] = (v[j] + p_ - mulmod(f, row[j], p_)) % p_;
    }
    std::size_t lead = 0;
    while (lead < width_ && v[lead] == 0) ++lead;
    if (lead == width_) return false;
    std::uint64_t inv = powmod(v[lead], p_ - 2, p_);
    for (std::size_t j = lead; j < width_; ++j) v[j] = mulmod(v[j], inv, p_);
    rows_.emplace_back(lead, std::move(v));
    return true;
  }

  std::size_t width_;
  std::uint64_t p_ = 2147483647ull;
  std::vector<std::pair<std::size_t, std::vector<std::uint64_t>>> rows_;
};

// Rational number with numerator and denominator below sqrt(p/2) congruent
// to a mod p, when one exists. Unique in that range by the classical
// reconstruction bound 2*N*D < p.
inline std::optional<Scalar> lift_mod(std::uint64_t a, std::uint64_t p) {
  const long long bound = 32767;
  long long u0 = static_cast<long long>(p), u1 = static_cast<long long>(a % p);
  long long v0 = 0, v1 = 1;
  while (u1 > bound) {
    long long q = u0 / u1;
    long long u2 = u0 - q * u1;
    long long v2 = v0 - q * v1;
    u0 = u1;
    u1 = u2;
    v0 = v1;
    v1 = v2;
  }
  if (v1 == 0 || std::llabs(v1) > bound) return std::nullopt;
  long long num = u1, den = v1;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Rational q(static_cast<long>(num), static_cast<long>(den));
  q.canonicalize();
  return Scalar::from_coeffs(1, {q});
}

}  // namespace detail

// Basis of the forms of exact degree d vanishing on the sampled points: the
// kernel of the monomial evaluation matrix, grown until its rank holds still
// over a full extra batch of samples and then computed and verified exactly.
// Sound by construction; complete only with respect to the samples.
inline std::vector<Polynomial> vanishing_forms(const SampleSource& src,
                                               const VarTablePtr& table, unsigned d) {
  std::vector<Monomial> grid = monomial_grid(table->size(), d);
  std::size_t batch = grid.size() / 4 + 1;
  std::size_t floor_rows = grid.size() + batch;
  std::size_t limit = 16 * floor_rows;
  detail::RankProbe probe(grid.size());
  std::optional<RowSpace> exact;
  std::vector<std::vector<Scalar>> rows;
  std::size_t since_growth = 0, k = 0;
  while (k < limit) {
    std::vector<Scalar> z = src.at(k);
    require_input(z.size() == src.width && src.width == table->size(),
                  "sample width does not match the variable table");
    std::vector<Scalar> row = detail::monomial_row(grid, z);
    bool grew = false;
    if (!exact) {
      int st = probe.try_insert(row);
      if (st < 0) {
        exact.emplace(grid.size());
        for (const auto& h : rows) {
          std::vector<Scalar> v = h;
          exact->insert(std::move(v));
        }
        since_growth = 0;
      } else {
        grew = st == 1;
      }
    }
    if (exact) {
      std::vector<Scalar> v = row;
      grew = exact->insert(std::move(v));
    }
    rows.push_back(std::move(row));
    ++k;
    since_growth = grew ? 0 : since_growth + 1;
    if (k >= floor_rows && since_growth >= batch) break;
  }
  if (k >= limit)
    fail_input("insufficient samples (matrix rank did not stabilize across two batches)");

  // Lift the mod-p kernel to rationals and check it against every sample row.
  // Success certifies the result: the lifted vectors are independent (unit
  // free columns) and lie in the exact kernel, so the exact rank is at most
  // the modular rank; it is also at least the modular rank, so the vectors
  // span the exact kernel of the sample matrix.
  std::vector<std::vector<Scalar>> kernel;
  bool certified = false;
  if (!exact) {
    std::vector<std::vector<std::uint64_t>> kmod = probe.kernel_mod();
    certified = true;
    for (const auto& vm : kmod) {
      std::vector<std::pair<std::size_t, Scalar>> sparse;
      for (std::size_t j = 0; j < vm.size() && certified; ++j) {
        if (vm[j] == 0) continue;
        std::optional<Scalar> c = detail::lift_mod(vm[j], probe.prime());
        if (!c) {
          certified = false;
          break;
        }
        sparse.emplace_back(j, std::move(*c));
      }
      if (!certified) break;
      for (const auto& r : rows) {
        Scalar dot(0);
        for (const auto& [j, c] : sparse) dot = dot + c * r[j];
        if (!dot.is_zero()) {
          certified = false;
          break;
        }
      }
      if (!certified) break;
      std::vector<Scalar> v(grid.size(), Scalar(0));
      for (auto& [j, c] : sparse) v[j] = std::move(c);
      kernel.push_back(std::move(v));
    }
    if (certified && kernel.empty()) return {};
  }
  if (!certified) {
    Mat m(rows.size(), grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j) m(i, j) = rows[i][j];
    kernel = kernel_auto(m);
    if (kernel.empty()) return {};
  }

  Mat basis(kernel.size(), grid.size());
  for (std::size_t i = 0; i < kernel.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) basis(i, j) = kernel[i][j];
  rref(basis);

  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    Polynomial p = Polynomial::zero(table);
    for (std::size_t j = 0; j < grid.size(); ++j) p.add_term(grid[j], basis(i, j));
    if (p.is_zero()) continue;
    for (std::size_t extra = 0; extra < 8; ++extra)
      if (!p.eval(src.at(rows.size() + extra)).is_zero())
        fail_input("insufficient samples (a sampled form fails on a fresh sample)");
    out.push_back(std::move(p));
  }
  return out;
}

// All forms of degree 1..d vanishing on model samples of the tree, in the
// invariant coordinates of its leaf space.
inline GeneratorSet degree_bounded_vanishing_ideal(const SpacedTree& t, unsigned d,
                                                   std::uint64_t seed = 0) {
  require_input(d >= 1, "degree bound must be at least 1");
  t.require_valid();
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  CoordSystem cs = invariant_coords(t, irreps);
  SampleSource src = tree_sample_source(t, cs, seed);
  GeneratorSet out{cs.table, {}, {}};
  for (unsigned e = 1; e <= d; ++e)
    for (Polynomial& p : vanishing_forms(src, cs.table, e))
      out.add(std::move(p), "oracle");
  canonicalize(out);
  return out;
}

// ---- block matrix spaces ---------------------------------------------------

// A tuple of symbolic matrices, one per irreducible, every entry a fresh
// variable base[label,row,col]. The flat entry order (irrep, row, col) also
// fixes the variable order.
struct BlockMatrixSpace {
  VarTablePtr table;
  std::vector<std::string> labels;
  std::vector<std::size_t> rows, cols;
  std::vector<std::vector<std::vector<Polynomial>>> blocks;

  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) n += rows[i] * cols[i];
    return n;
  }
};

inline BlockMatrixSpace block_matrix_space(const std::vector<std::string>& labels,
                                           const std::vector<std::size_t>& rows,
                                           const std::vector<std::size_t>& cols,
                                           const std::string& base) {
  if (labels.size() != rows.size() || labels.size() != cols.size())
    fail_internal("block shape arity mismatch");
  BlockMatrixSpace s;
  s.labels = labels;
  s.rows = rows;
  s.cols = cols;
  std::vector<Var> vars;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t r = 0; r < rows[i]; ++r)
      for (std::size_t c = 0; c < cols[i]; ++c)
        vars.push_back(Var{base, {labels[i], std::to_string(r), std::to_string(c)}});
  s.table = VarTable::make(std::move(vars));
  s.blocks.resize(labels.size());
  std::size_t at = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s.blocks[i].resize(rows[i]);
    for (std::size_t r = 0; r < rows[i]; ++r)
      for (std::size_t c = 0; c < cols[i]; ++c)
        s.blocks[i][r].push_back(Polynomial::variable(s.table, at++));
  }
  return s;
}

// ---- transport between invariant and block coordinates ---------------------

// The linear identification of the invariants of the leaf space with the
// block coordinates of the equivariant maps from the column side to the row
// side: each invariant basis tensor, reshaped to a map, is block diagonal,
// and the square change of basis is inverted so both directions are
// available. `forms` holds the blocks of the generic invariant tensor as
// linear forms in its coordinates.
struct CoordBlockBridge {
  std::vector<std::string> labels;
  std::vector<std::size_t> rows, cols;
  std::vector<std::vector<std::vector<Polynomial>>> forms;
  Mat to_entries;  // (flat block entries) x dim
  Mat to_coords;   // inverse

  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) n += rows[i] * cols[i];
    return n;
  }
};

namespace detail {

inline Mat reshape_to_map(const CoordSystem& cs, const std::vector<Scalar>& vec,
                          const std::vector<std::string>& row_slots,
                          const std::vector<std::string>& col_slots) {
  std::vector<LeafTensor::Slot> slots;
  slots.reserve(cs.slot_names.size());
  for (std::size_t i = 0; i < cs.slot_names.size(); ++i)
    slots.push_back({cs.slot_names[i], cs.slot_dims[i]});
  LeafTensor v(slots, Scalar(0));
  v.coords() = vec;
  std::vector<std::string> order = row_slots;
  order.insert(order.end(), col_slots.begin(), col_slots.end());
  LeafTensor w = v.reordered(order);
  std::size_t dr = 1, dc = 1;
  for (std::size_t i = 0; i < w.rank(); ++i) {
    if (i < row_slots.size())
      dr *= w.slots()[i].dim;
    else
      dc *= w.slots()[i].dim;
  }
  Mat f(dr, dc);
  for (std::size_t a = 0; a < dr; ++a)
    for (std::size_t b = 0; b < dc; ++b) f(a, b) = w.coords()[a * dc + b];
  return f;
}

}  // namespace detail

inline CoordBlockBridge coord_block_bridge(const CoordSystem& cs,
                                           const std::vector<std::string>& row_slots,
                                           const std::vector<std::string>& col_slots,
                                           const HomBlocks& hb,
                                           const std::vector<Irrep>& irreps) {
  CoordBlockBridge b;
  for (std::size_t i = 0; i < irreps.size(); ++i) {
    b.labels.push_back(irreps[i].label());
    b.rows.push_back(hb.rows(i));
    b.cols.push_back(hb.cols(i));
  }
  std::size_t total = b.total();
  if (total != cs.dim())
    fail_internal("block entry count does not match the invariant dimension");
  b.to_entries = Mat(total, cs.dim());
  b.forms.resize(b.labels.size());
  for (std::size_t i = 0; i < b.labels.size(); ++i) {
    b.forms[i].resize(b.rows[i]);
    for (std::size_t r = 0; r < b.rows[i]; ++r)
      b.forms[i][r].assign(b.cols[i], Polynomial::zero(cs.table));
  }
  for (std::size_t j = 0; j < cs.dim(); ++j) {
    Mat f = detail::reshape_to_map(cs, cs.basis[j], row_slots, col_slots);
    std::vector<Mat> bl = hb.blocks_of(f);
    std::size_t e = 0;
    Monomial zj(cs.table->size(), 0);
    zj[j] = 1;
    for (std::size_t i = 0; i < bl.size(); ++i)
      for (std::size_t r = 0; r < b.rows[i]; ++r)
        for (std::size_t c = 0; c < b.cols[i]; ++c) {
          const Scalar& val = bl[i](r, c);
          b.to_entries(e++, j) = val;
          if (!val.is_zero()) b.forms[i][r][c].add_term(zj, val);
        }
  }
  auto inv = mat_inverse(b.to_entries);
  if (!inv) fail_internal("block transport is singular");
  b.to_coords = std::move(*inv);
  return b;
}

// ---- rank minors -------------------------------------------------------------

// For each irreducible with bound < min(rows, cols), all (bound+1)-minors of
// the block: the equations forcing the block to factor through `bound`
// copies of the irreducible.
inline std::vector<Polynomial> rank_minors(
    const std::vector<std::vector<std::vector<Polynomial>>>& blocks,
    const std::vector<std::size_t>& bound) {
  if (blocks.size() != bound.size()) fail_internal("rank bound arity mismatch");
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::size_t r = blocks[i].size();
    std::size_t c = r == 0 ? 0 : blocks[i][0].size();
    if (r == 0 || c == 0 || bound[i] >= std::min(r, c)) continue;
    for (Polynomial& m : symbolic_minors(blocks[i], static_cast<unsigned>(bound[i]) + 1))
      if (!m.is_zero()) out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<Polynomial> rank_minors(const BlockMatrixSpace& space,
                                           const std::vector<std::size_t>& bound) {
  return rank_minors(space.blocks, bound);
}

// ---- contracted ideals ---------------------------------------------------------

namespace detail {

inline VarTablePtr combined_table(const VarTablePtr& a, const VarTablePtr& b) {
  std::vector<Var> vars = a->vars_;
  vars.insert(vars.end(), b->vars_.begin(), b->vars_.end());
  return VarTable::make(std::move(vars));
}

inline std::vector<std::vector<std::vector<Polynomial>>> retable_blocks(
    const std::vector<std::vector<std::vector<Polynomial>>>& blocks,
    const VarTablePtr& target) {
  std::vector<std::vector<std::vector<Polynomial>>> out(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out[i].resize(blocks[i].size());
    for (std::size_t r = 0; r < blocks[i].size(); ++r)
      for (const Polynomial& p : blocks[i][r])
        out[i][r].push_back(poly_retable_by_name(p, target));
  }
  return out;
}

inline std::vector<std::vector<std::vector<Polynomial>>> multiply_blocks(
    const std::vector<std::vector<std::vector<Polynomial>>>& a,
    const std::vector<std::vector<std::vector<Polynomial>>>& b,
    const VarTablePtr& table) {
  if (a.size() != b.size()) fail_internal("block count mismatch in product");
  std::vector<std::vector<std::vector<Polynomial>>> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t ra = a[i].size();
    std::size_t mid = ra ? a[i][0].size() : b[i].size();
    std::size_t cb = b[i].empty() ? 0 : b[i][0].size();
    if (mid != b[i].size()) fail_internal("inner block dimension mismatch");
    out[i].resize(ra);
    for (std::size_t r = 0; r < ra; ++r) {
      out[i][r].assign(cb, Polynomial::zero(table));
      for (std::size_t k = 0; k < mid; ++k) {
        if (a[i][r][k].is_zero()) continue;
        for (std::size_t c = 0; c < cb; ++c) {
          if (b[i][k][c].is_zero()) continue;
          out[i][r][c] = out[i][r][c] + a[i][r][k] * b[i][k][c];
        }
      }
    }
  }
  return out;
}

inline std::vector<Polynomial> flatten_blocks(
    const std::vector<std::vector<std::vector<Polynomial>>>& blocks) {
  std::vector<Polynomial> out;
  for (const auto& bl : blocks)
    for (const auto& row : bl)
      for (const Polynomial& p : row) out.push_back(p);
  return out;
}

// Reduced row echelon basis of the span of a polynomial family, with columns
// ordered by decreasing monomial order. The output only depends on the span,
// not on the basis the family arrived in.
inline std::vector<Polynomial> rref_batch(const std::vector<Polynomial>& batch) {
  std::vector<const Polynomial*> live;
  for (const Polynomial& p : batch)
    if (!p.is_zero()) live.push_back(&p);
  std::vector<Polynomial> out;
  if (live.empty()) return out;
  if (live.size() == 1) {
    out.push_back(live.front()->monic());
    return out;
  }
  std::map<Monomial, std::size_t, MonoGreater> col;
  for (const Polynomial* p : live)
    for (const auto& [m, c] : p->terms()) col.emplace(m, 0);
  std::vector<Monomial> monos;
  monos.reserve(col.size());
  for (auto& [m, j] : col) {
    j = monos.size();
    monos.push_back(m);
  }
  Mat a(live.size(), monos.size());
  for (std::size_t r = 0; r < live.size(); ++r)
    for (const auto& [m, c] : live[r]->terms()) a(r, col[m]) = c;
  rref(a);
  const VarTablePtr& tab = live.front()->table();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Polynomial p = Polynomial::zero(tab);
    for (std::size_t j = 0; j < monos.size(); ++j)
      if (!a(r, j).is_zero()) p.add_term(monos[j], a(r, j));
    if (!p.is_zero()) out.push_back(std::move(p));
  }
  return out;
}

// Expands every f against the blockwise product of the target with a fresh
// symbolic factor, collects the coefficients of the fresh variables, and
// returns them over the target's own table. On the left the fs live on
// matrices of shape rows x middle and the product is target * (fresh
// cols x middle factor); on the right the fs live on middle x cols and the
// product is (fresh middle x rows factor) * target. `f_to_coords` maps the
// flat product entries to the fs' variables.
inline std::vector<Polynomial> contract_core(
    const std::vector<std::vector<std::vector<Polynomial>>>& target_blocks,
    const VarTablePtr& target_table, const std::vector<std::size_t>& rows,
    const std::vector<std::size_t>& cols, const std::vector<std::size_t>& middle,
    const std::vector<std::string>& labels, bool left,
    const std::vector<Polynomial>& fs, const VarTablePtr& f_table,
    const Mat& f_to_coords) {
  std::string aux_base = "y";
  for (std::size_t i = 0; i < target_table->size(); ++i)
    if (target_table->var(i).base == aux_base) {
      aux_base = "y0";
      break;
    }
  BlockMatrixSpace aux = left ? block_matrix_space(labels, cols, middle, aux_base)
                              : block_matrix_space(labels, middle, rows, aux_base);
  VarTablePtr combined = combined_table(target_table, aux.table);
  std::vector<bool> is_aux(combined->size(), false);
  for (std::size_t i = target_table->size(); i < combined->size(); ++i) is_aux[i] = true;

  auto tgt = retable_blocks(target_blocks, combined);
  auto fac = retable_blocks(aux.blocks, combined);
  auto prod =
      left ? multiply_blocks(tgt, fac, combined) : multiply_blocks(fac, tgt, combined);
  std::vector<Polynomial> entries = flatten_blocks(prod);
  if (entries.size() != f_to_coords.cols())
    fail_internal("contracted product has unexpected entry count");
  if (f_table->size() != f_to_coords.rows())
    fail_internal("contraction transport does not match the generator table");

  std::vector<std::optional<Polynomial>> images(f_table->size());
  for (std::size_t j = 0; j < f_table->size(); ++j) {
    Polynomial img = Polynomial::zero(combined);
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const Scalar& w = f_to_coords(j, e);
      if (w.is_zero() || entries[e].is_zero()) continue;
      img = img + w * entries[e];
    }
    images[j] = std::move(img);
  }

  std::vector<Polynomial> out;
  for (const Polynomial& f : fs) {
    Polynomial expanded = poly_substitute(f, combined, images);
    std::vector<Polynomial> batch;
    for (auto& [mono, coeff] : coeff_extract(expanded, is_aux))
      batch.push_back(poly_retable_by_name(coeff, target_table));
    // The raw coefficients depend on the block bases picked by the assembly
    // isomorphisms; the echelon basis of their span does not.
    for (Polynomial& p : rref_batch(batch)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

// Coefficient generators of f(product) for every f over the adjacent block
// space: on the left the fs live on matrices of shape rows x middle and the
// product is target times a fresh cols x middle factor; on the right the fs
// live on middle x cols and a fresh middle x rows factor multiplies the
// target. The fs' variables must be ordered like the entries of their block
// space, (irrep, row, col). Output is over the target's table.
inline GeneratorSet contracted_ideal(const BlockMatrixSpace& target,
                                     const std::vector<std::size_t>& middle, bool left,
                                     const std::vector<Polynomial>& fs) {
  std::size_t n = target.labels.size();
  if (middle.size() != n) fail_internal("middle multiplicity arity mismatch");
  BlockMatrixSpace fspace =
      left ? block_matrix_space(target.labels, target.rows, middle, "f")
           : block_matrix_space(target.labels, middle, target.cols, "f");
  std::size_t fdim = fspace.total();
  std::vector<int> ident_map(fdim);
  for (std::size_t i = 0; i < fdim; ++i) ident_map[i] = static_cast<int>(i);
  std::vector<Polynomial> fs_local;
  fs_local.reserve(fs.size());
  for (const Polynomial& f : fs) {
    require_input(f.table()->size() == fdim,
                  "generator table does not match the stated block space");
    fs_local.push_back(poly_retable(f, fspace.table, ident_map));
  }
  std::vector<Polynomial> coeffs = detail::contract_core(
      target.blocks, target.table, target.rows, target.cols, middle, target.labels, left,
      fs_local, fspace.table, Mat::identity(fdim));
  GeneratorSet out{target.table, {}, {}};
  for (Polynomial& p : coeffs) out.add(std::move(p), "contracted");
  canonicalize(out);
  return out;
}

// ---- star ideals and providers ---------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

inline void describe_module(const GModule& m, std::string& out) {
  out += "|d" + std::to_string(m.dim());
  for (std::uint32_t g = 0; g < m.group()->size(); ++g) {
    Mat a = m.act_mat(g);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const Scalar& v = a(i, j);
        if (!v.is_zero())
          out += ";" + std::to_string(i) + "," + std::to_string(j) + "=" + v.to_string();
      }
  }
}

}  // namespace detail

// Isomorphism-class key of a spaced star: the group multiplication table,
// the leaf modules in leaf order and the centre module. Leaf names are
// deliberately excluded, the coordinate labels never mention them.
inline std::string star_key(const Star& s) {
  const FiniteGroup& g = *s.tree.group();
  std::string text = "g" + std::to_string(g.size()) + ":";
  for (std::uint32_t i = 0; i < g.size(); ++i)
    for (std::uint32_t j = 0; j < g.size(); ++j)
      text += std::to_string(g.mult(i, j)) + ".";
  for (const std::string& p : s.tree.leaf_names())
    detail::describe_module(*s.tree.module(p), text);
  text += "|c";
  detail::describe_module(*s.tree.module(s.centre), text);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return std::string(buf);
}

// Resolution strategy for the star ideals the recursion consumes: the
// built-in table, a user-supplied map of generators keyed by star_key, or
// the sampling oracle up to a degree bound. File entries fall back to the
// built-in table when a key is missing.
struct StarIdealProvider {
  enum class Kind { builtin, file, oracle };
  Kind kind = Kind::builtin;
  unsigned oracle_degree = 2;
  std::uint64_t oracle_seed = 0;
  std::map<std::string, std::vector<std::string>> file_entries;

  static StarIdealProvider builtin_table() { return {}; }

  static StarIdealProvider from_entries(
      std::map<std::string, std::vector<std::string>> e) {
    StarIdealProvider p;
    p.kind = Kind::file;
    p.file_entries = std::move(e);
    return p;
  }

  static StarIdealProvider oracle(unsigned degree, std::uint64_t seed = 0) {
    StarIdealProvider p;
    p.kind = Kind::oracle;
    p.oracle_degree = degree;
    p.oracle_seed = seed;
    return p;
  }
};

GeneratorSet tree_ideal(const SpacedTree& t, const StarIdealProvider& provider);

namespace detail {

// The built-in star table. std::nullopt means the star is unknown; an empty
// vector means known with no equations.
inline std::optional<std::vector<Polynomial>> builtin_star_gens(const Star& s,
                                                                const CoordSystem& cs) {
  const SpacedTree& t = s.tree;
  const FiniteGroup& g = *t.group();
  std::size_t n = s.leaf_count();

  if (g.size() == 1) {
    bool dims2 = true;
    for (const std::string& v : t.names()) dims2 = dims2 && t.module(v)->dim() == 2;
    if (dims2 && n == 3) return std::vector<Polynomial>{};
    return std::nullopt;
  }

  if (g.size() == 2) {
    GModule reg = GModule::regular_module(t.group());
    for (const std::string& v : t.names())
      if (!(*t.module(v) == reg)) return std::nullopt;
    if (n == 3) return std::vector<Polynomial>{};
    if (n == 4) {
      auto zlabel = [&](std::initializer_list<int> which) {
        std::vector<bool> in(4, false);
        for (int i : which) in[i] = true;
        std::string out = "z[";
        for (int i = 0; i < 4; ++i)
          out += std::string(i ? "," : "") + (in[i] ? "s" : "t");
        return out + "]";
      };
      std::string head = zlabel({}) + "*" + zlabel({0, 1, 2, 3});
      std::vector<Polynomial> gens;
      gens.push_back(parse_polynomial(
          head + " - " + zlabel({0, 1}) + "*" + zlabel({2, 3}), cs.table));
      gens.push_back(parse_polynomial(
          head + " - " + zlabel({0, 2}) + "*" + zlabel({1, 3}), cs.table));
      gens.push_back(parse_polynomial(
          head + " - " + zlabel({0, 3}) + "*" + zlabel({1, 2}), cs.table));
      return gens;
    }
    return std::nullopt;
  }

  return std::nullopt;
}

inline void verify_on_samples(const SpacedTree& t, const CoordSystem& cs,
                              const std::vector<Polynomial>& polys, std::size_t count,
                              std::uint64_t seed, bool user_input,
                              const std::string& what) {
  for (std::size_t k = 0; k < count; ++k) {
    TreeRepresentation a =
        random_representation(t, Rng::derive(seed, "check:" + std::to_string(k)), true);
    std::vector<Scalar> z = cs.coords_of(psi(t, a));
    for (const Polynomial& p : polys) {
      if (p.eval(z).is_zero()) continue;
      if (user_input)
        fail_verification(what + " does not vanish on model samples: " + p.to_string());
      fail_internal(what + " does not vanish on model samples: " + p.to_string());
    }
  }
}

}  // namespace detail

// Generators of the model ideal of a star. Stars with fewer than three
// leaves go through the generic valency-two machinery; larger stars are
// resolved by the provider.
inline GeneratorSet star_ideal(const Star& s, const StarIdealProvider& provider) {
  s.tree.require_valid();
  require_input(s.tree.has_vertex(s.centre) && !s.tree.is_leaf(s.centre),
                "star centre '" + s.centre + "' must be an internal vertex");
  require_input(s.tree.degree(s.centre) + 1 == s.tree.vertex_count(),
                "tree is not a star around '" + s.centre + "'");
  if (s.leaf_count() <= 2) return tree_ideal(s.tree, provider);

  std::vector<Irrep> irreps = builtin_irreps(*s.tree.group());
  CoordSystem cs = invariant_coords(s.tree, irreps);
  GeneratorSet out{cs.table, {}, {}};

  if (provider.kind == StarIdealProvider::Kind::oracle) {
    merge_into(out, degree_bounded_vanishing_ideal(s.tree, provider.oracle_degree,
                                                   provider.oracle_seed));
    canonicalize(out);
    return out;
  }

  if (provider.kind == StarIdealProvider::Kind::file) {
    auto it = provider.file_entries.find(star_key(s));
    if (it != provider.file_entries.end()) {
      std::vector<Polynomial> gens;
      for (const std::string& text : it->second)
        gens.push_back(parse_polynomial(text, cs.table));
      detail::verify_on_samples(s.tree, cs, gens, 3, 17, true,
                                "star ideal entry " + star_key(s));
      for (Polynomial& p : gens) out.add(std::move(p), "star-input");
      canonicalize(out);
      return out;
    }
  }

  auto builtin = detail::builtin_star_gens(s, cs);
  if (!builtin)
    fail_unresolved("no star ideal available for the " + std::to_string(s.leaf_count()) +
                    "-leaf star with key " + star_key(s) +
                    "; supply an ideal file or enable the sampling oracle");
  detail::verify_on_samples(s.tree, cs, *builtin, 3, 17, false, "built-in star ideal");
  for (Polynomial& p : *builtin) out.add(std::move(p), "star-input");
  canonicalize(out);
  return out;
}

// ---- the decomposition at a valency-two vertex -------------------------------

namespace detail {

struct SplitContext {
  std::string q;
  SpacedTree t1, t2;                // t1 holds the lexicographically least vertex
  std::vector<std::string> l1, l2;  // leaves of t on either side of q
  CoordSystem cs;                   // coordinates of the whole tree
  CoordBlockBridge bridge;          // invariants of the leaf space as maps
  std::vector<std::size_t> middle;  // multiplicities of the module at q
};

inline SplitContext make_split_context(const SpacedTree& t, const std::string& q,
                                       const std::vector<Irrep>& irreps) {
  require_input(t.has_vertex(q) && !t.is_leaf(q) && t.degree(q) == 2,
                "'" + q + "' is not a valency-two vertex");
  std::vector<SpacedTree> branches = branches_at(t, q);
  if (branches.size() != 2) fail_internal("valency-two vertex with unexpected branches");
  auto min_name = [&](const SpacedTree& b) {
    std::string best;
    for (const std::string& v : b.names())
      if (v != q && (best.empty() || v < best)) best = v;
    return best;
  };
  SplitContext ctx;
  ctx.q = q;
  bool first_is_t1 = min_name(branches[0]) < min_name(branches[1]);
  ctx.t1 = first_is_t1 ? branches[0] : branches[1];
  ctx.t2 = first_is_t1 ? branches[1] : branches[0];
  for (const std::string& p : ctx.t1.leaf_names())
    if (p != q) ctx.l1.push_back(p);
  for (const std::string& p : ctx.t2.leaf_names())
    if (p != q) ctx.l2.push_back(p);

  auto side_module = [&](const std::vector<std::string>& leaves) {
    std::vector<ModulePtr> mods;
    for (const std::string& p : leaves) mods.push_back(t.module(p));
    return tensor_product(mods);
  };
  ModulePtr m1 = side_module(ctx.l1), m2 = side_module(ctx.l2);
  ctx.cs = invariant_coords(t, irreps);
  HomBlocks hb(*m2, *m1, irreps);
  ctx.bridge = coord_block_bridge(ctx.cs, ctx.l1, ctx.l2, hb, irreps);
  std::vector<std::uint32_t> mult = multiplicities(*t.module(q), irreps);
  ctx.middle.assign(mult.begin(), mult.end());
  return ctx;
}

// Contracts branch generators through q: the fs live on the invariant
// coordinates of the branch (t1 when left, t2 otherwise) and come back as
// generators on the invariant coordinates of the whole tree.
inline std::vector<Polynomial> contract_branch(const SplitContext& ctx,
                                               const std::vector<Irrep>& irreps,
                                               const std::vector<Polynomial>& fs,
                                               bool left) {
  if (fs.empty()) return {};
  const SpacedTree& branch = left ? ctx.t1 : ctx.t2;
  CoordSystem bcs = invariant_coords(branch, irreps);
  std::vector<Polynomial> fs_local;
  fs_local.reserve(fs.size());
  for (const Polynomial& f : fs) fs_local.push_back(poly_retable_by_name(f, bcs.table));

  auto side_module = [&](const std::vector<std::string>& leaves) {
    std::vector<ModulePtr> mods;
    for (const std::string& p : leaves) mods.push_back(branch.module(p));
    return tensor_product(mods);
  };
  ModulePtr vq = branch.module(ctx.q);
  CoordBlockBridge bb;
  if (left) {
    ModulePtr m1 = side_module(ctx.l1);
    HomBlocks hb(*vq, *m1, irreps);
    bb = coord_block_bridge(bcs, ctx.l1, {ctx.q}, hb, irreps);
  } else {
    ModulePtr m2 = side_module(ctx.l2);
    HomBlocks hb(*m2, *vq, irreps);
    bb = coord_block_bridge(bcs, {ctx.q}, ctx.l2, hb, irreps);
  }
  return contract_core(ctx.bridge.forms, ctx.cs.table, ctx.bridge.rows, ctx.bridge.cols,
                       ctx.middle, ctx.bridge.labels, left, fs_local, bcs.table,
                       bb.to_coords);
}

}  // namespace detail

// Generators obtained by contracting the given branch generators through the
// valency-two vertex q. `left` selects the branch holding the
// lexicographically least vertex; the fs must live on that branch's
// invariant coordinates.
inline GeneratorSet contracted_tree_ideal(const SpacedTree& t, const std::string& q,
                                          bool left, const std::vector<Polynomial>& fs) {
  t.require_valid();
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  detail::SplitContext ctx = detail::make_split_context(t, q, irreps);
  GeneratorSet out{ctx.cs.table, {}, {}};
  for (Polynomial& p : detail::contract_branch(ctx, irreps, fs, left))
    out.add(std::move(p), "contracted");
  canonicalize(out);
  return out;
}

// Block shapes of the decomposition at a valency-two vertex: per irreducible
// the multiplicities in the first branch's leaf space (k), in the module at
// the vertex (l) and in the second branch's leaf space (m).
struct SplitShapes {
  std::vector<std::string> labels;
  std::vector<std::size_t> k, l, m;
};

inline SplitShapes split_shapes(const SpacedTree& t, const std::string& q) {
  t.require_valid();
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  detail::SplitContext ctx = detail::make_split_context(t, q, irreps);
  return {ctx.bridge.labels, ctx.bridge.rows, ctx.middle, ctx.bridge.cols};
}

// ---- the main recursion --------------------------------------------------------

// Generators of the model ideal of the tree: star inputs from the provider,
// rank minors and contracted branch ideals at valency-two vertices, and edge
// subdivision when no valency-two vertex exists.
inline GeneratorSet tree_ideal(const SpacedTree& t, const StarIdealProvider& provider) {
  t.require_valid();
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  CoordSystem cs = invariant_coords(t, irreps);
  GeneratorSet out{cs.table, {}, {}};

  if (t.vertex_count() == 2) return out;

  std::vector<std::string> internal = t.internal_names();
  if (internal.size() == 1 && t.degree(internal[0]) >= 3)
    return star_ideal(Star{t, internal[0]}, provider);

  std::string q;
  for (const std::string& v : internal)
    if (t.degree(v) == 2) {
      q = v;
      break;
    }

  if (q.empty()) {
    // No valency-two vertex: subdivide the least internal edge and recurse.
    // The subdivided tree has the same leaves, hence the same coordinate
    // labels, so its generators carry over by name.
    for (const auto& [a, b] : t.edges())
      if (!t.is_leaf(a) && !t.is_leaf(b)) {
        ValencyTwoInsertion ins = insert_valency2(t, a, b);
        merge_into(out, tree_ideal(ins.tree, provider));
        canonicalize(out);
        return out;
      }
    fail_internal("tree without valency-two vertices has no internal edge");
  }

  detail::SplitContext ctx = detail::make_split_context(t, q, irreps);
  GeneratorSet f1 = tree_ideal(ctx.t1, provider);
  GeneratorSet f2 = tree_ideal(ctx.t2, provider);

  for (Polynomial& p : rank_minors(ctx.bridge.forms, ctx.middle))
    out.add(std::move(p), "minor");
  for (Polynomial& p : detail::contract_branch(ctx, irreps, f1.polys, true))
    out.add(std::move(p), "contracted");
  for (Polynomial& p : detail::contract_branch(ctx, irreps, f2.polys, false))
    out.add(std::move(p), "contracted");
  canonicalize(out);
  return out;
}

// ---- flattening presentation ------------------------------------------------

// Union over the internal vertices of the ideals of the flattened stars,
// re-expressed in the invariant coordinates of the original leaf space
// through the slot-grouping isomorphism.
inline GeneratorSet flattening_ideal_sum(const SpacedTree& t,
                                         const StarIdealProvider& provider) {
  t.require_valid();
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  CoordSystem cs = invariant_coords(t, irreps);
  GeneratorSet out{cs.table, {}, {}};
  if (t.vertex_count() == 2) return out;

  std::vector<LeafTensor::Slot> tslots;
  for (std::size_t i = 0; i < cs.slot_names.size(); ++i)
    tslots.push_back({cs.slot_names[i], cs.slot_dims[i]});

  for (const std::string& q : t.internal_names()) {
    Star flat = flatten_at(t, q);
    GeneratorSet gens = tree_ideal(flat.tree, provider);
    if (gens.polys.empty()) continue;
    CoordSystem fcs = invariant_coords(flat.tree, irreps);

    // Reorder each basis tensor of the tree into concatenated class-member
    // order and regroup the slots classwise; the flat index is unchanged.
    std::vector<std::string> order;
    std::vector<LeafTensor::Slot> fslots;
    for (std::size_t i = 0; i < fcs.slot_names.size(); ++i) {
      const std::string& cls = fcs.slot_names[i];
      std::string member;
      for (char c : cls + "+") {
        if (c == '+') {
          order.push_back(member);
          member.clear();
        } else {
          member += c;
        }
      }
      fslots.push_back({cls, fcs.slot_dims[i]});
    }

    Mat trans(fcs.dim(), cs.dim());
    for (std::size_t j = 0; j < cs.dim(); ++j) {
      LeafTensor v(tslots, Scalar(0));
      v.coords() = cs.basis[j];
      LeafTensor w = v.reordered(order);
      LeafTensor grouped(fslots, Scalar(0));
      grouped.coords() = w.coords();
      std::vector<Scalar> zf = fcs.coords_of(grouped);
      for (std::size_t i = 0; i < zf.size(); ++i) trans(i, j) = zf[i];
    }

    std::vector<std::optional<Polynomial>> images(fcs.table->size());
    for (std::size_t i = 0; i < fcs.dim(); ++i) {
      Polynomial img = Polynomial::zero(cs.table);
      for (std::size_t j = 0; j < cs.dim(); ++j) {
        if (trans(i, j).is_zero()) continue;
        Monomial m(cs.table->size(), 0);
        m[j] = 1;
        img.add_term(m, trans(i, j));
      }
      images[i] = std::move(img);
    }
    for (std::size_t i = 0; i < gens.polys.size(); ++i) {
      Polynomial f = poly_retable_by_name(gens.polys[i], fcs.table);
      out.add(poly_substitute(f, cs.table, images), gens.tags[i]);
    }
  }
  canonicalize(out);
  return out;
}

// ---- pull-back along leaf embeddings ------------------------------------------

namespace detail {

// Applies a rectangular matrix to one slot, changing its dimension.
inline LeafTensor map_slot(const LeafTensor& x, std::size_t i, const Mat& m) {
  require_input(m.cols() == x.slots()[i].dim, "map does not match the slot dimension");
  std::vector<LeafTensor::Slot> slots = x.slots();
  slots[i].dim = static_cast<std::uint32_t>(m.rows());
  LeafTensor out(slots, Scalar(0));
  for (std::size_t f = 0; f < out.size(); ++f) {
    std::vector<std::uint32_t> multi = out.multi_index(f);
    Scalar acc(0);
    std::uint32_t a = multi[i];
    for (std::uint32_t b = 0; b < x.slots()[i].dim; ++b) {
      if (m(a, b).is_zero()) continue;
      multi[i] = b;
      acc = acc + m(a, b) * x.coords()[x.flat_index(multi)];
    }
    multi[i] = a;
    out.coords()[f] = acc;
  }
  return out;
}

}  // namespace detail

// Pulls the generators of the large star back along per-leaf equivariant
// injections tau[small leaf] from the small leaf module into the big one;
// leaves correspond in lexicographic order. The result cuts out the small
// star's model inside its own coordinates.
inline GeneratorSet pullback_star_ideal(const Star& big, const GeneratorSet& gens,
                                        const Star& small,
                                        const std::map<std::string, Mat>& tau) {
  big.tree.require_valid();
  small.tree.require_valid();
  require_input(big.tree.group() == small.tree.group(),
                "pull-back needs stars over the same group");
  std::vector<std::string> big_leaves = big.tree.leaf_names();
  std::vector<std::string> small_leaves = small.tree.leaf_names();
  require_input(big_leaves.size() == small_leaves.size(),
                "pull-back needs stars with the same number of leaves");

  const FiniteGroup& g = *big.tree.group();
  std::vector<Mat> maps;
  for (std::size_t i = 0; i < small_leaves.size(); ++i) {
    auto it = tau.find(small_leaves[i]);
    require_input(it != tau.end(),
                  "no injection given for leaf '" + small_leaves[i] + "'");
    const Mat& m = it->second;
    const GModule& vs = *small.tree.module(small_leaves[i]);
    const GModule& vb = *big.tree.module(big_leaves[i]);
    require_input(m.rows() == vb.dim() && m.cols() == vs.dim(),
                  "injection shape mismatch at leaf '" + small_leaves[i] + "'");
    require_input(mat_rank(m) == vs.dim(),
                  "injection at leaf '" + small_leaves[i] + "' is not injective");
    for (std::uint32_t e = 0; e < g.size(); ++e)
      if (!(m * vs.act_mat(e) == vb.act_mat(e) * m))
        fail_input("injection at leaf '" + small_leaves[i] + "' is not equivariant");
    maps.push_back(m);
  }

  std::vector<Irrep> irreps = builtin_irreps(g);
  CoordSystem bcs = invariant_coords(big.tree, irreps);
  CoordSystem scs = invariant_coords(small.tree, irreps);

  std::vector<LeafTensor::Slot> sslots, bslots;
  for (std::size_t i = 0; i < scs.slot_names.size(); ++i)
    sslots.push_back({scs.slot_names[i], scs.slot_dims[i]});
  for (std::size_t i = 0; i < bcs.slot_names.size(); ++i)
    bslots.push_back({bcs.slot_names[i], bcs.slot_dims[i]});

  Mat trans(bcs.dim(), scs.dim());
  for (std::size_t j = 0; j < scs.dim(); ++j) {
    LeafTensor v(sslots, Scalar(0));
    v.coords() = scs.basis[j];
    for (std::size_t i = 0; i < maps.size(); ++i) v = detail::map_slot(v, i, maps[i]);
    LeafTensor w(bslots, Scalar(0));
    w.coords() = v.coords();
    std::vector<Scalar> zb = bcs.coords_of(w);
    for (std::size_t i = 0; i < zb.size(); ++i) trans(i, j) = zb[i];
  }

  std::vector<std::optional<Polynomial>> images(bcs.table->size());
  for (std::size_t i = 0; i < bcs.dim(); ++i) {
    Polynomial img = Polynomial::zero(scs.table);
    for (std::size_t j = 0; j < scs.dim(); ++j) {
      if (trans(i, j).is_zero()) continue;
      Monomial m(scs.table->size(), 0);
      m[j] = 1;
      img.add_term(m, trans(i, j));
    }
    images[i] = std::move(img);
  }

  GeneratorSet out{scs.table, {}, {}};
  for (const Polynomial& f : gens.polys) {
    Polynomial fb = poly_retable_by_name(f, bcs.table);
    out.add(poly_substitute(fb, scs.table, images), "pullback");
  }
  canonicalize(out);
  return out;
}

// ---- root extension ------------------------------------------------------------

// Equations for the closure of the leaf tensors reachable from the root r
// with arbitrary, not necessarily invariant, root vectors. They live in the
// block coordinates of the equivariant maps from the regular module into the
// leaf space, which is linearly isomorphic to the leaf space itself;
// block_coords_of computes the coordinates of a concrete tensor.
struct RootExtensionIdeal {
  GeneratorSet gens;  // over the w[irrep,row,col] entry variables
  std::vector<std::string> labels;
  std::vector<std::size_t> k, l, m;
  std::function<std::vector<Scalar>(const LeafTensor&)> coords_fn;

  std::vector<Scalar> block_coords_of(const LeafTensor& u) const { return coords_fn(u); }
};

inline RootExtensionIdeal root_extension_ideal(const SpacedTree& t, const std::string& r,
                                               const StarIdealProvider& provider) {
  t.require_valid();
  require_input(t.has_vertex(r), "root '" + r + "' is not in the tree");
  require_input(!t.is_leaf(r), "root extension needs an internal root");

  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  RootExtension ext = root_extend(t, r);
  GeneratorSet f = tree_ideal(ext.tree, provider);
  CoordSystem ecs = invariant_coords(ext.tree, irreps);

  ModulePtr lmod = leaf_space(t);
  ModulePtr vr = t.module(r);
  ModulePtr kg = share(GModule::regular_module(t.group()));

  HomBlocks hb_kl(*vr, *lmod, irreps);
  CoordBlockBridge bridge =
      coord_block_bridge(ecs, t.leaf_names(), {ext.leaf}, hb_kl, irreps);

  auto irr = std::make_shared<std::vector<Irrep>>(irreps);
  auto hb_km = std::make_shared<HomBlocks>(*kg, *lmod, *irr);
  RootExtensionIdeal out;
  out.labels = bridge.labels;
  out.k = bridge.rows;
  out.l = bridge.cols;
  for (std::size_t i = 0; i < irreps.size(); ++i) out.m.push_back(hb_km->cols(i));

  BlockMatrixSpace target = block_matrix_space(out.labels, out.k, out.m, "w");
  out.gens = GeneratorSet{target.table, {}, {}};
  for (Polynomial& p : rank_minors(target, out.l)) out.gens.add(std::move(p), "minor");

  for (Polynomial& p :
       detail::contract_core(target.blocks, target.table, out.k, out.m, out.l,
                             out.labels, true, f.polys, ecs.table, bridge.to_coords))
    out.gens.add(std::move(p), "contracted");
  canonicalize(out.gens);

  GroupPtr group = t.group();
  out.coords_fn = [group, lmod, hb_km, irr](const LeafTensor& u) {
    require_input(u.size() == lmod->dim(), "tensor does not match the leaf space");
    std::vector<Scalar> base = u.sorted().coords();
    Mat f_u(lmod->dim(), group->size());
    for (std::uint32_t g = 0; g < group->size(); ++g) {
      std::vector<Scalar> col = lmod->act_vec(g, base);
      for (std::size_t i = 0; i < col.size(); ++i) f_u(i, g) = col[i];
    }
    std::vector<Mat> bl = hb_km->blocks_of(f_u);
    std::vector<Scalar> out_coords;
    for (const Mat& b : bl)
      for (std::size_t a = 0; a < b.rows(); ++a)
        for (std::size_t c = 0; c < b.cols(); ++c) out_coords.push_back(b(a, c));
    return out_coords;
  };
  return out;
}

// ---- linear forms cutting the invariant subspace --------------------------------

// In the ambient weight coordinates of an abelian model, the span of the
// invariants is cut out by the coordinates whose total character is
// non-trivial. Useful when generators are reported in ambient coordinates.
struct LinearCuts {
  VarTablePtr table;
  std::vector<Polynomial> forms;
};

inline LinearCuts linear_cut_forms(const SpacedTree& t) {
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  CoordSystem amb = ambient_weight_coords(t, irreps);
  CoordSystem inv = invariant_coords(t, irreps);
  std::map<std::string, bool> invariant;
  for (std::size_t i = 0; i < inv.table->size(); ++i) {
    Var v = inv.table->vars_[i];
    v.base = amb.table->var(0).base;
    invariant[v.str()] = true;
  }
  LinearCuts out{amb.table, {}};
  for (std::size_t i = 0; i < amb.table->size(); ++i)
    if (!invariant.count(amb.table->name(i)))
      out.forms.push_back(Polynomial::variable(amb.table, i));
  return out;
}

}  // namespace etm
