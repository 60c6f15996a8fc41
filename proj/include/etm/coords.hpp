#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "etm/error.hpp"
#include "etm/irreps.hpp"
#include "etm/linalg.hpp"
#include "etm/polynomial.hpp"
#include "etm/tensor.hpp"
#include "etm/tree.hpp"
#include "etm/vartable.hpp"

namespace etm {

// A linear coordinate system on a subspace of the leaf space of a tree: a
// named basis together with precomputed dual functionals, so coordinates of
// numeric and symbolic tensors are extracted exactly. For abelian groups the
// basis vectors are products of leaf weight vectors scaled by |G| to the
// number of internal vertices, which makes the monomial parametrisations of
// group-based models come out with coefficient 1; otherwise they are the
// orbit sums of the product basis.
struct CoordSystem {
  VarTablePtr table;
  std::vector<std::vector<Scalar>> basis;
  std::vector<std::string> slot_names;
  std::vector<std::uint32_t> slot_dims;
  bool weight_regime = false;

  std::size_t dim() const { return basis.size(); }

  template <class T>
  void require_shape(const GenTensor<T>& v) const {
    require_input(v.rank() == slot_names.size(),
                  "tensor rank does not match the coordinate system");
    for (std::size_t i = 0; i < slot_names.size(); ++i)
      require_input(v.slots()[i].name == slot_names[i] &&
                        v.slots()[i].dim == slot_dims[i],
                    "tensor slots do not match the coordinate system");
  }

  // Exact coordinates; rejects tensors outside the span.
  template <class T>
  std::vector<T> coords_of(const GenTensor<T>& v) const {
    require_shape(v);
    std::vector<T> out;
    out.reserve(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      T acc = v.zero();
      for (std::size_t j = 0; j < dim(); ++j) {
        if (dual_(i, j).is_zero()) continue;
        acc = acc + dual_(i, j) * v.coords()[pivot_rows_[j]];
      }
      out.push_back(std::move(acc));
    }
    for (std::size_t r = 0; r < v.size(); ++r) {
      T acc = v.zero();
      for (std::size_t i = 0; i < dim(); ++i) {
        if (basis[i][r].is_zero()) continue;
        acc = acc + basis[i][r] * out[i];
      }
      if (!(acc == v.coords()[r]))
        fail_input("tensor is not in the span of the coordinate system");
    }
    return out;
  }

  LeafTensor tensor_of(const std::vector<Scalar>& z) const {
    require_input(z.size() == dim(), "coordinate vector has the wrong length");
    std::vector<typename LeafTensor::Slot> slots;
    for (std::size_t i = 0; i < slot_names.size(); ++i)
      slots.push_back({slot_names[i], slot_dims[i]});
    LeafTensor v(slots, Scalar(0));
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t r = 0; r < v.size(); ++r)
        v.coords()[r] = v.coords()[r] + z[i] * basis[i][r];
    return v;
  }

  // Called once after filling basis and slots: picks a set of rows on which
  // the basis matrix is invertible and inverts it.
  void finish() {
    std::size_t n = 1;
    for (std::uint32_t d : slot_dims) n *= d;
    for (const auto& b : basis)
      if (b.size() != n) fail_internal("coordinate basis vector has wrong length");
    Mat m(n, dim());
    for (std::size_t j = 0; j < dim(); ++j)
      for (std::size_t r = 0; r < n; ++r) m(r, j) = basis[j][r];
    std::vector<std::size_t> pivots = detail_pivot_rows(m);
    require_input(pivots.size() == dim(),
                  "coordinate basis vectors are linearly dependent");
    Mat sq(dim(), dim());
    for (std::size_t j = 0; j < dim(); ++j)
      for (std::size_t i = 0; i < dim(); ++i) sq(i, j) = m(pivots[i], j);
    auto inv = mat_inverse(sq);
    if (!inv.has_value()) fail_internal("pivot submatrix is singular");
    pivot_rows_ = std::move(pivots);
    dual_ = std::move(*inv);
  }

 private:
  static std::vector<std::size_t> detail_pivot_rows(const Mat& m) {
    // Row indices whose span covers the column space, found by incremental
    // rank growth.
    std::vector<std::size_t> rows;
    RowSpace space(m.cols());
    for (std::size_t r = 0; r < m.rows() && rows.size() < m.cols(); ++r) {
      std::vector<Scalar> row(m.cols());
      for (std::size_t j = 0; j < m.cols(); ++j) row[j] = m(r, j);
      if (space.insert(row)) rows.push_back(r);
    }
    return rows;
  }

  std::vector<std::size_t> pivot_rows_;
  Mat dual_{0, 0};
};

namespace detail {

struct LeafWeightData {
  std::vector<WeightVector> vecs;
  std::vector<std::string> labels;
};

inline LeafWeightData leaf_weight_data(const GModule& mod,
                                       const std::vector<Irrep>& irreps) {
  LeafWeightData out;
  out.vecs = weight_basis(mod, irreps);
  std::map<std::uint32_t, std::size_t> count;
  for (const WeightVector& w : out.vecs) ++count[w.chr];
  std::map<std::uint32_t, std::size_t> running;
  for (const WeightVector& w : out.vecs) {
    std::string label = irreps[w.chr].label();
    if (count[w.chr] > 1) label += "#" + std::to_string(++running[w.chr]);
    out.labels.push_back(label);
  }
  return out;
}

inline Scalar internal_scale(const SpacedTree& t) {
  Scalar order(static_cast<int>(t.group()->size()));
  return order.pow(static_cast<unsigned>(t.internal_names().size()));
}

inline CoordSystem weight_system(const SpacedTree& t,
                                 const std::vector<Irrep>& irreps,
                                 bool invariant_only, const std::string& base) {
  CoordSystem out;
  out.weight_regime = true;
  std::vector<LeafWeightData> data;
  for (const std::string& p : t.leaf_names()) {
    out.slot_names.push_back(p);
    out.slot_dims.push_back(static_cast<std::uint32_t>(t.module(p)->dim()));
    data.push_back(leaf_weight_data(*t.module(p), irreps));
  }
  Scalar scale = internal_scale(t);
  const FiniteGroup& g = *t.group();
  std::vector<Var> vars;
  std::vector<std::size_t> idx(data.size(), 0);
  for (;;) {
    bool trivial = true;
    for (std::uint32_t e = 0; e < g.size() && trivial; ++e) {
      Scalar chr(1);
      for (std::size_t i = 0; i < data.size(); ++i)
        chr = chr * irreps[data[i].vecs[idx[i]].chr].character(e);
      trivial = chr.is_one();
    }
    if (trivial || !invariant_only) {
      std::vector<std::string> labels;
      std::vector<Scalar> vec{scale};
      for (std::size_t i = 0; i < data.size(); ++i) {
        labels.push_back(data[i].labels[idx[i]]);
        const std::vector<Scalar>& w = data[i].vecs[idx[i]].coords;
        std::vector<Scalar> next;
        next.reserve(vec.size() * w.size());
        for (const Scalar& a : vec)
          for (const Scalar& b : w) next.push_back(a * b);
        vec = std::move(next);
      }
      vars.push_back({base, std::move(labels)});
      out.basis.push_back(std::move(vec));
    }
    std::size_t i = data.size();
    while (i > 0) {
      --i;
      if (++idx[i] < data[i].vecs.size()) break;
      idx[i] = 0;
      if (i == 0) {
        out.table = VarTable::make(std::move(vars));
        out.finish();
        return out;
      }
    }
  }
}

inline CoordSystem orbit_system(const SpacedTree& t, const std::string& base) {
  CoordSystem out;
  out.weight_regime = false;
  std::vector<ModulePtr> mods;
  for (const std::string& p : t.leaf_names()) {
    out.slot_names.push_back(p);
    out.slot_dims.push_back(static_cast<std::uint32_t>(t.module(p)->dim()));
    mods.push_back(t.module(p));
  }
  ModulePtr space = leaf_space(t);
  RowSpace seen(space->dim());
  std::vector<Var> vars;
  for (std::size_t j = 0; j < space->dim(); ++j) {
    std::vector<Scalar> e(space->dim(), Scalar(0));
    e[j] = Scalar(1);
    std::vector<Scalar> w = reynolds(*space, e);
    if (!seen.insert(w)) continue;
    std::size_t lead = 0;
    while (w[lead].is_zero()) ++lead;
    Scalar inv = w[lead].inverse();
    for (Scalar& c : w) c = inv * c;
    std::vector<std::string> labels;
    std::size_t rest = j;
    for (std::size_t i = mods.size(); i-- > 0;) {
      labels.insert(labels.begin(), mods[i]->label(rest % mods[i]->dim()));
      rest /= mods[i]->dim();
    }
    vars.push_back({base, std::move(labels)});
    out.basis.push_back(std::move(w));
  }
  out.table = VarTable::make(std::move(vars));
  out.finish();
  return out;
}

}  // namespace detail

// Invariant coordinates of the leaf space of a tree, named base[l1,...,lk].
inline CoordSystem invariant_coords(const SpacedTree& t,
                                    const std::vector<Irrep>& irreps,
                                    const std::string& base = "z") {
  t.require_valid();
  if (t.group()->abelian()) return detail::weight_system(t, irreps, true, base);
  return detail::orbit_system(t, base);
}

// Full weight coordinates of the leaf space (abelian groups only): one
// variable per product of leaf weight vectors.
inline CoordSystem ambient_weight_coords(const SpacedTree& t,
                                         const std::vector<Irrep>& irreps,
                                         const std::string& base = "x") {
  t.require_valid();
  require_input(t.group()->abelian(), "weight coordinates need an abelian group");
  return detail::weight_system(t, irreps, false, base);
}

}  // namespace etm
