#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "etm/error.hpp"
#include "etm/gmodule.hpp"
#include "etm/linalg.hpp"
#include "etm/scalar.hpp"

namespace etm {

// Dense tensor with named factors ("slots"). Coordinates are stored flat in
// row-major order with the first slot most significant. The coefficient type
// is Scalar for numeric work and Polynomial for symbolic work; both provide
// ring operations, is_zero(), and equality. A zero prototype is carried so
// that coefficient types without a default zero (polynomials need their
// variable table) can be handled uniformly.
template <class T>
class GenTensor {
 public:
  struct Slot {
    std::string name;
    std::uint32_t dim;
    friend bool operator==(const Slot& a, const Slot& b) {
      return a.name == b.name && a.dim == b.dim;
    }
    friend bool operator!=(const Slot& a, const Slot& b) { return !(a == b); }
  };

  GenTensor(std::vector<Slot> slots, T zero)
      : slots_(std::move(slots)), zero_(std::move(zero)) {
    size_t n = 1;
    for (const Slot& s : slots_) {
      require_input(s.dim > 0, "tensor slot '" + s.name + "' has dimension 0");
      n *= s.dim;
    }
    for (size_t i = 0; i < slots_.size(); ++i)
      for (size_t j = i + 1; j < slots_.size(); ++j)
        require_input(slots_[i].name != slots_[j].name,
                      "duplicate tensor slot '" + slots_[i].name + "'");
    coords_.assign(n, zero_);
  }

  size_t rank() const { return slots_.size(); }
  size_t size() const { return coords_.size(); }
  const std::vector<Slot>& slots() const { return slots_; }
  const T& zero() const { return zero_; }
  std::vector<T>& coords() { return coords_; }
  const std::vector<T>& coords() const { return coords_; }

  size_t slot_index(const std::string& name) const {
    for (size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].name == name) return i;
    fail_input("tensor has no slot named '" + name + "'");
  }

  bool has_slot(const std::string& name) const {
    for (const Slot& s : slots_)
      if (s.name == name) return true;
    return false;
  }

  size_t flat_index(const std::vector<std::uint32_t>& multi) const {
    if (multi.size() != slots_.size()) fail_internal("tensor index arity mismatch");
    size_t idx = 0;
    for (size_t i = 0; i < slots_.size(); ++i) {
      if (multi[i] >= slots_[i].dim) fail_internal("tensor index out of range");
      idx = idx * slots_[i].dim + multi[i];
    }
    return idx;
  }

  std::vector<std::uint32_t> multi_index(size_t flat) const {
    std::vector<std::uint32_t> multi(slots_.size());
    for (size_t i = slots_.size(); i-- > 0;) {
      multi[i] = static_cast<std::uint32_t>(flat % slots_[i].dim);
      flat /= slots_[i].dim;
    }
    return multi;
  }

  T& at(const std::vector<std::uint32_t>& multi) { return coords_[flat_index(multi)]; }
  const T& at(const std::vector<std::uint32_t>& multi) const {
    return coords_[flat_index(multi)];
  }

  bool is_zero() const {
    for (const T& c : coords_)
      if (!c.is_zero()) return false;
    return true;
  }

  T coordinate_sum() const {
    T acc = zero_;
    for (const T& c : coords_) acc = acc + c;
    return acc;
  }

  // Removes slot i by fixing its index to b.
  GenTensor slice(size_t i, std::uint32_t b) const {
    if (i >= slots_.size() || b >= slots_[i].dim) fail_internal("bad tensor slice");
    std::vector<Slot> rest;
    rest.reserve(slots_.size() - 1);
    for (size_t j = 0; j < slots_.size(); ++j)
      if (j != i) rest.push_back(slots_[j]);
    GenTensor out(rest, zero_);
    std::vector<std::uint32_t> multi(slots_.size());
    for (size_t f = 0; f < out.size(); ++f) {
      auto sub = out.multi_index(f);
      for (size_t j = 0, k = 0; j < slots_.size(); ++j)
        multi[j] = (j == i) ? b : sub[k++];
      out.coords_[f] = coords_[flat_index(multi)];
    }
    return out;
  }

  // Permutes the slots into the given name order.
  GenTensor reordered(const std::vector<std::string>& order) const {
    require_input(order.size() == slots_.size(), "slot reorder has wrong arity");
    std::vector<size_t> src(order.size());
    std::vector<Slot> target(order.size());
    for (size_t i = 0; i < order.size(); ++i) {
      src[i] = slot_index(order[i]);
      target[i] = slots_[src[i]];
    }
    for (size_t i = 0; i < src.size(); ++i)
      for (size_t j = i + 1; j < src.size(); ++j)
        require_input(src[i] != src[j], "slot reorder repeats '" + order[i] + "'");
    GenTensor out(target, zero_);
    std::vector<std::uint32_t> multi(slots_.size());
    for (size_t f = 0; f < out.size(); ++f) {
      auto tm = out.multi_index(f);
      for (size_t i = 0; i < src.size(); ++i) multi[src[i]] = tm[i];
      out.coords_[f] = coords_[flat_index(multi)];
    }
    return out;
  }

  GenTensor renamed(const std::string& from, const std::string& to) const {
    size_t i = slot_index(from);
    require_input(from == to || !has_slot(to),
                  "slot rename target '" + to + "' already exists");
    GenTensor out = *this;
    out.slots_[i].name = to;
    return out;
  }

  GenTensor sorted() const {
    std::vector<std::string> order;
    order.reserve(slots_.size());
    for (const Slot& s : slots_) order.push_back(s.name);
    std::sort(order.begin(), order.end());
    return reordered(order);
  }

  bool slots_sorted() const {
    for (size_t i = 1; i < slots_.size(); ++i)
      if (slots_[i - 1].name >= slots_[i].name) return false;
    return true;
  }

  // Applies a scalar matrix to one slot: new[a] = sum_b m(a,b) old[b].
  GenTensor apply_to_slot(size_t i, const Mat& m) const {
    if (i >= slots_.size()) fail_internal("bad tensor slot");
    require_input(m.rows() == slots_[i].dim && m.cols() == slots_[i].dim,
                  "matrix size does not match slot '" + slots_[i].name + "'");
    GenTensor out(slots_, zero_);
    std::vector<std::uint32_t> multi(slots_.size());
    for (size_t f = 0; f < size(); ++f) {
      auto tm = multi_index(f);
      T acc = zero_;
      for (std::uint32_t b = 0; b < slots_[i].dim; ++b) {
        if (m(tm[i], b).is_zero()) continue;
        multi = tm;
        multi[i] = b;
        acc = acc + m(tm[i], b) * coords_[flat_index(multi)];
      }
      out.coords_[f] = acc;
    }
    return out;
  }

  // Multiplies the coordinates along one slot by per-index weights.
  GenTensor scale_slot(size_t i, const std::vector<Scalar>& w) const {
    if (i >= slots_.size()) fail_internal("bad tensor slot");
    require_input(w.size() == slots_[i].dim,
                  "weight vector does not match slot '" + slots_[i].name + "'");
    GenTensor out = *this;
    for (size_t f = 0; f < size(); ++f) {
      auto tm = multi_index(f);
      out.coords_[f] = w[tm[i]] * coords_[f];
    }
    return out;
  }

  GenTensor sum_over_slot(size_t i) const {
    GenTensor acc = slice(i, 0);
    for (std::uint32_t b = 1; b < slots_[i].dim; ++b) {
      GenTensor s = slice(i, b);
      for (size_t f = 0; f < acc.size(); ++f)
        acc.coords_[f] = acc.coords_[f] + s.coords_[f];
    }
    return acc;
  }

  friend GenTensor operator+(const GenTensor& a, const GenTensor& b) {
    require_input(a.slots_ == b.slots_, "tensor addition with mismatched slots");
    GenTensor out = a;
    for (size_t f = 0; f < out.size(); ++f)
      out.coords_[f] = out.coords_[f] + b.coords_[f];
    return out;
  }

  friend GenTensor operator-(const GenTensor& a, const GenTensor& b) {
    require_input(a.slots_ == b.slots_, "tensor subtraction with mismatched slots");
    GenTensor out = a;
    for (size_t f = 0; f < out.size(); ++f)
      out.coords_[f] = out.coords_[f] - b.coords_[f];
    return out;
  }

  friend GenTensor operator*(const Scalar& c, const GenTensor& a) {
    GenTensor out = a;
    for (T& v : out.coords_) v = c * v;
    return out;
  }

  friend bool operator==(const GenTensor& a, const GenTensor& b) {
    return a.slots_ == b.slots_ && a.coords_ == b.coords_;
  }
  friend bool operator!=(const GenTensor& a, const GenTensor& b) { return !(a == b); }

  friend GenTensor outer(const GenTensor& a, const GenTensor& b) {
    std::vector<Slot> slots = a.slots_;
    for (const Slot& s : b.slots_) {
      require_input(!a.has_slot(s.name),
                    "outer product repeats slot '" + s.name + "'");
      slots.push_back(s);
    }
    GenTensor out(slots, a.zero_ * b.zero_);
    for (size_t i = 0; i < a.size(); ++i) {
      if (a.coords_[i].is_zero()) continue;
      for (size_t j = 0; j < b.size(); ++j) {
        if (b.coords_[j].is_zero()) continue;
        out.coords_[i * b.size() + j] = a.coords_[i] * b.coords_[j];
      }
    }
    return out;
  }

 private:
  std::vector<Slot> slots_;
  T zero_;
  std::vector<T> coords_;
};

using LeafTensor = GenTensor<Scalar>;
using PolyTensor = GenTensor<Polynomial>;

// Contraction over a shared slot q with orthonormal basis: the result is
// sum_b tensor_i (b | part_i), i.e. for every index b of q the q-slices of
// all parts are tensored together and the products are added up. The output
// slots are the remaining slots of all parts, sorted by name.
template <class T>
GenTensor<T> star_contract(const std::vector<GenTensor<T>>& parts,
                           const std::string& q, std::uint32_t q_dim) {
  require_input(!parts.empty(), "star contraction needs at least one tensor");
  std::vector<size_t> qi(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) {
    qi[i] = parts[i].slot_index(q);
    require_input(parts[i].slots()[qi[i]].dim == q_dim,
                  "module mismatch at vertex '" + q + "'");
  }
  bool first = true;
  GenTensor<T> acc({}, parts[0].zero());
  for (std::uint32_t b = 0; b < q_dim; ++b) {
    GenTensor<T> term = parts[0].slice(qi[0], b);
    for (size_t i = 1; i < parts.size(); ++i)
      term = outer(term, parts[i].slice(qi[i], b));
    if (first) {
      acc = term;
      first = false;
    } else {
      acc = acc + term;
    }
  }
  return acc.sorted();
}

// Group element acting on a tensor whose slots carry the given modules
// (slot-aligned). Permutation modules avoid the matrix path.
template <class T>
GenTensor<T> act_on_tensor(const GenTensor<T>& x,
                           const std::vector<ModulePtr>& modules,
                           std::uint32_t g) {
  require_input(modules.size() == x.rank(), "module list does not match tensor rank");
  bool all_perm = true;
  for (size_t i = 0; i < modules.size(); ++i) {
    require_input(modules[i]->dim() == x.slots()[i].dim,
                  "module dimension does not match slot '" + x.slots()[i].name + "'");
    all_perm = all_perm && modules[i]->is_permutation();
  }
  if (all_perm) {
    GenTensor<T> out(x.slots(), x.zero());
    std::vector<std::uint32_t> multi(x.rank());
    for (size_t f = 0; f < x.size(); ++f) {
      auto tm = x.multi_index(f);
      for (size_t i = 0; i < multi.size(); ++i) multi[i] = modules[i]->perm(g).img[tm[i]];
      out.coords()[x.flat_index(multi)] = x.coords()[f];
    }
    return out;
  }
  GenTensor<T> out = x;
  for (size_t i = 0; i < modules.size(); ++i)
    out = out.apply_to_slot(i, modules[i]->act_mat(g));
  return out;
}

// Group average of a tensor under the per-slot module actions.
template <class T>
GenTensor<T> reynolds_tensor(const GenTensor<T>& x,
                             const std::vector<ModulePtr>& modules) {
  require_input(!modules.empty(), "reynolds on a rank-0 tensor");
  const FiniteGroup& g = *modules[0]->group();
  GenTensor<T> acc = act_on_tensor(x, modules, 0);
  for (std::uint32_t e = 1; e < g.size(); ++e) acc = acc + act_on_tensor(x, modules, e);
  Scalar inv = Scalar(Rational(static_cast<long>(g.size()))).inverse();
  return inv * acc;
}

}  // namespace etm
