#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "etm/error.hpp"
#include "etm/polynomial.hpp"
#include "etm/rng.hpp"
#include "etm/tensor.hpp"
#include "etm/tree.hpp"

namespace etm {

// A representation of a spaced tree: one tensor A_e in V_p (x) V_q per edge
// e = {p, q}. The tensor is stored once with named slots, so no orientation
// is fixed; reading the edge "backwards" is the same object with the slots
// swapped, which GenTensor handles by name.
template <class T>
class TreeRep {
 public:
  using Tensor = GenTensor<T>;

  void set(const std::string& p, const std::string& q, const Tensor& x) {
    require_input(p != q, "edge tensor needs two distinct vertices");
    require_input(x.rank() == 2 && x.has_slot(p) && x.has_slot(q),
                  "edge tensor for " + p + "-" + q + " must have exactly those slots");
    tensors_.insert_or_assign(key(p, q), x.sorted());
  }

  bool has(const std::string& p, const std::string& q) const {
    return tensors_.count(key(p, q)) > 0;
  }

  const Tensor& edge(const std::string& p, const std::string& q) const {
    auto it = tensors_.find(key(p, q));
    if (it == tensors_.end())
      fail_input("representation has no tensor on edge " + key(p, q).first + "-" +
                 key(p, q).second);
    return it->second;
  }

  std::size_t size() const { return tensors_.size(); }

 private:
  static std::pair<std::string, std::string> key(const std::string& p,
                                                 const std::string& q) {
    return p < q ? std::make_pair(p, q) : std::make_pair(q, p);
  }

  std::map<std::pair<std::string, std::string>, Tensor> tensors_;
};

using TreeRepresentation = TreeRep<Scalar>;
using SymbolicRepresentation = TreeRep<Polynomial>;

// Modules attached to the slots of a tensor whose slot names are vertices.
template <class T>
std::vector<ModulePtr> modules_for_slots(const SpacedTree& t, const GenTensor<T>& x) {
  std::vector<ModulePtr> out;
  out.reserve(x.rank());
  for (const auto& s : x.slots()) out.push_back(t.module(s.name));
  return out;
}

template <class T>
void validate_representation(const SpacedTree& t, const TreeRep<T>& a) {
  t.require_valid();
  for (const auto& e : t.edges()) {
    const auto& x = a.edge(e.first, e.second);
    for (const auto& s : x.slots())
      require_input(s.dim == t.module(s.name)->dim(),
                    "edge tensor " + e.first + "-" + e.second +
                        " does not match the module of '" + s.name + "'");
  }
}

// Exact test: every edge tensor is fixed by the diagonal group action.
template <class T>
bool rep_is_equivariant(const SpacedTree& t, const TreeRep<T>& a) {
  for (const auto& e : t.edges()) {
    const auto& x = a.edge(e.first, e.second);
    auto mods = modules_for_slots(t, x);
    for (std::uint32_t g = 1; g < t.group()->size(); ++g)
      if (!(act_on_tensor(x, mods, g) == x)) return false;
  }
  return true;
}

// The tensor-valued parametrisation: a two-vertex tree hands back its edge
// tensor; otherwise the tree is split at an internal vertex (the given one,
// or the lexicographically smallest) and the branch tensors are contracted
// over its distinguished basis. The result does not depend on the choice of
// split vertex.
template <class T>
GenTensor<T> psi(const SpacedTree& t, const TreeRep<T>& a,
                 const std::string& split_at = "") {
  t.require_valid();
  if (t.vertex_count() == 2) {
    const auto& e = t.edges()[0];
    return a.edge(e.first, e.second);
  }
  std::string q = split_at;
  if (q.empty()) {
    q = t.internal_names().at(0);
  } else {
    require_input(t.has_vertex(q) && !t.is_leaf(q),
                  "split vertex '" + q + "' is not internal");
  }
  std::vector<GenTensor<T>> parts;
  for (const SpacedTree& b : branches_at(t, q)) parts.push_back(psi(b, a));
  return star_contract(parts, q, static_cast<std::uint32_t>(t.module(q)->dim()));
}

// Tensor with entries m(a, b) on slots (p, q): the matrix of a map V_q -> V_p
// written against orthonormal bases, rows indexed by p.
inline LeafTensor hom_tensor(const std::string& p, const std::string& q, const Mat& m) {
  LeafTensor x({{p, static_cast<std::uint32_t>(m.rows())},
                {q, static_cast<std::uint32_t>(m.cols())}},
               Scalar(0));
  for (std::uint32_t i = 0; i < m.rows(); ++i)
    for (std::uint32_t j = 0; j < m.cols(); ++j) x.at({i, j}) = m(i, j);
  return x.sorted();
}

inline LeafTensor identity_tensor(const std::string& p, const std::string& q,
                                  std::size_t dim) {
  return hom_tensor(p, q, Mat::identity(dim));
}

// The matrix of a two-slot tensor read as a map V_from -> V_to.
inline Mat hom_matrix_of(const LeafTensor& x, const std::string& to,
                         const std::string& from) {
  std::size_t ti = x.slot_index(to), fi = x.slot_index(from);
  Mat m(x.slots()[ti].dim, x.slots()[fi].dim);
  std::vector<std::uint32_t> multi(2);
  for (std::uint32_t i = 0; i < m.rows(); ++i)
    for (std::uint32_t j = 0; j < m.cols(); ++j) {
      multi[ti] = i;
      multi[fi] = j;
      m(i, j) = x.at(multi);
    }
  return m;
}

inline Mat edge_matrix(const TreeRepresentation& a, const std::string& to,
                       const std::string& from) {
  return hom_matrix_of(a.edge(to, from), to, from);
}

// Distribution over the distinguished basis of the root module.
struct RootDistribution {
  std::vector<Scalar> pi;
};

inline RootDistribution make_distribution(std::vector<Scalar> pi) {
  Scalar sum(0);
  for (const Scalar& p : pi) sum = sum + p;
  require_input(sum.is_one(), "root distribution does not sum to 1");
  return RootDistribution{std::move(pi)};
}

// Checks that the representation is stochastic when every edge is read as a
// transition map directed away from the root r: non-negative rational
// entries and all column sums exactly 1.
inline void require_stochastic(const SpacedTree& t, const TreeRepresentation& a,
                               const std::string& r) {
  require_input(t.has_vertex(r), "unknown root '" + r + "'");
  std::vector<std::pair<std::string, std::string>> directed;
  std::map<std::string, bool> seen{{r, true}};
  std::vector<std::string> stack{r};
  while (!stack.empty()) {
    std::string u = stack.back();
    stack.pop_back();
    for (const std::string& v : t.neighbors(u)) {
      if (seen[v]) continue;
      seen[v] = true;
      directed.emplace_back(u, v);
      stack.push_back(v);
    }
  }
  for (const auto& [u, v] : directed) {
    Mat m = hom_matrix_of(a.edge(u, v), v, u);
    std::string name = "edge " + u + "->" + v;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      Scalar sum(0);
      for (std::size_t i = 0; i < m.rows(); ++i) {
        require_input(m(i, j).is_rational(), name + ": entry is not rational");
        require_input(!(m(i, j).as_rational() < 0), name + ": negative entry");
        sum = sum + m(i, j);
      }
      require_input(sum.is_one(), name + ": column " + std::to_string(j) +
                                      " does not sum to 1");
    }
  }
}

// The distribution tensor of the hidden-root model: psi of the representation
// with one root-adjacent edge composed with diag(pi). Any root-adjacent edge
// gives the same result; the lexicographically smallest neighbour is used.
inline LeafTensor phi(const SpacedTree& t, const std::string& r,
                      const TreeRepresentation& a, const RootDistribution& pi) {
  t.require_valid();
  require_input(t.has_vertex(r), "unknown root '" + r + "'");
  require_input(pi.pi.size() == t.module(r)->dim(),
                "root distribution size does not match the module of '" + r + "'");
  Scalar sum(0);
  for (const Scalar& p : pi.pi) sum = sum + p;
  require_input(sum.is_one(), "root distribution does not sum to 1");
  require_stochastic(t, a, r);
  std::string p = t.neighbors(r).at(0);
  TreeRepresentation b = a;
  const LeafTensor& x = a.edge(p, r);
  b.set(p, r, x.scale_slot(x.slot_index(r), pi.pi));
  return psi(t, b);
}

// Seed-deterministic representation with uniform bounded-height rational
// entries; with equivariant set, each edge tensor is replaced by its group
// average. Draws are derived per edge, so they do not depend on edge order
// or on the equivariant flag.
inline TreeRepresentation random_representation(const SpacedTree& t,
                                                std::uint64_t seed,
                                                bool equivariant,
                                                std::int64_t height = 9) {
  t.require_valid();
  TreeRepresentation a;
  for (const auto& e : t.edges()) {
    Rng rng(Rng::derive(seed, "edge:" + e.first + ":" + e.second));
    ModulePtr mp = t.module(e.first), mq = t.module(e.second);
    LeafTensor x({{e.first, static_cast<std::uint32_t>(mp->dim())},
                  {e.second, static_cast<std::uint32_t>(mq->dim())}},
                 Scalar(0));
    for (Scalar& c : x.coords()) c = Scalar(rng.rational(height));
    if (equivariant) x = reynolds_tensor(x, {mp, mq});
    a.set(e.first, e.second, x);
  }
  return a;
}

// Equivariant representation that is stochastic away from r. Entries are
// sampled non-negative and group-averaged (permutation modules keep them
// non-negative), then each column is divided by its sum; the sums are
// constant on basis orbits, so the scaling preserves equivariance. Zero
// column sums trigger a fresh draw.
inline TreeRepresentation random_stochastic_representation(const SpacedTree& t,
                                                           const std::string& r,
                                                           std::uint64_t seed,
                                                           std::int64_t height = 9) {
  t.require_valid();
  require_input(t.has_vertex(r), "unknown root '" + r + "'");
  TreeRepresentation a;
  std::map<std::string, bool> seen{{r, true}};
  std::vector<std::string> stack{r};
  while (!stack.empty()) {
    std::string u = stack.back();
    stack.pop_back();
    for (const std::string& v : t.neighbors(u)) {
      if (seen[v]) continue;
      seen[v] = true;
      stack.push_back(v);
      ModulePtr mu = t.module(u), mv = t.module(v);
      require_input(mu->is_permutation() && mv->is_permutation(),
                    "stochastic sampling needs permutation modules on edge " + u +
                        "-" + v);
      for (int attempt = 0;; ++attempt) {
        Rng rng(Rng::derive(seed, "stoch:" + u + ":" + v + ":" +
                                      std::to_string(attempt)));
        LeafTensor x({{u, static_cast<std::uint32_t>(mu->dim())},
                      {v, static_cast<std::uint32_t>(mv->dim())}},
                     Scalar(0));
        for (Scalar& c : x.coords()) c = Scalar(rng.nonneg_rational(height));
        x = reynolds_tensor(x, {mu, mv});
        Mat m = hom_matrix_of(x, v, u);
        std::vector<Scalar> inv(mu->dim(), Scalar(0));
        bool ok = true;
        for (std::size_t j = 0; j < mu->dim() && ok; ++j) {
          Scalar sum(0);
          for (std::size_t i = 0; i < mv->dim(); ++i) sum = sum + m(i, j);
          if (sum.is_zero())
            ok = false;
          else
            inv[j] = sum.inverse();
        }
        if (!ok) continue;
        a.set(u, v, x.scale_slot(x.slot_index(u), inv));
        break;
      }
    }
  }
  return a;
}

inline RootDistribution random_distribution(std::size_t dim, std::uint64_t seed,
                                            std::int64_t height = 9) {
  for (int attempt = 0;; ++attempt) {
    Rng rng(Rng::derive(seed, "pi:" + std::to_string(attempt)));
    std::vector<Rational> v(dim);
    Rational sum(0);
    for (Rational& c : v) {
      c = rng.nonneg_rational(height);
      sum += c;
    }
    if (sum == 0) continue;
    std::vector<Scalar> pi(dim);
    for (std::size_t i = 0; i < dim; ++i) pi[i] = Scalar(v[i] / sum);
    return RootDistribution{std::move(pi)};
  }
}

// Group element acting simultaneously on every edge tensor.
inline TreeRepresentation act_group(const SpacedTree& t, const TreeRepresentation& a,
                                    std::uint32_t g) {
  TreeRepresentation out;
  for (const auto& e : t.edges()) {
    const LeafTensor& x = a.edge(e.first, e.second);
    out.set(e.first, e.second, act_on_tensor(x, modules_for_slots(t, x), g));
  }
  return out;
}

// Group element acting on a tensor over any set of vertex slots.
template <class T>
GenTensor<T> act_on_vertex_slots(const SpacedTree& t, const GenTensor<T>& x,
                                 std::uint32_t g) {
  return act_on_tensor(x, modules_for_slots(t, x), g);
}

// An element h of the product of the G-equivariant general linear groups of
// the vertex modules: one invertible equivariant matrix per vertex (vertices
// not listed get the identity). Changing the tree by h transports the forms
// and distinguished bases; in coordinates psi of the changed tree is
// computed by twisting every contraction with h^{-1} at the contracted slot.
struct BaseChange {
  std::map<std::string, Mat> h, h_inv;
};

inline BaseChange make_base_change(const SpacedTree& t,
                                   const std::map<std::string, Mat>& given) {
  t.require_valid();
  for (const auto& [name, m] : given)
    require_input(t.has_vertex(name), "base change lists unknown vertex '" + name + "'");
  BaseChange out;
  for (const std::string& n : t.names()) {
    ModulePtr mod = t.module(n);
    auto it = given.find(n);
    Mat m = it != given.end() ? it->second : Mat::identity(mod->dim());
    require_input(m.rows() == mod->dim() && m.cols() == mod->dim(),
                  "base change at '" + n + "' has the wrong size");
    for (std::uint32_t g = 1; g < t.group()->size(); ++g)
      require_input(m * mod->act_mat(g) == mod->act_mat(g) * m,
                    "base change at '" + n + "' is not equivariant");
    auto inv = mat_inverse(m);
    require_input(inv.has_value(), "base change at '" + n + "' is not invertible");
    out.h.emplace(n, std::move(m));
    out.h_inv.emplace(n, std::move(*inv));
  }
  return out;
}

// psi of the changed tree hT, with the representation read unchanged. The
// transported dual basis pairs as (hb | u)' = (b | h^{-1} u), so each branch
// tensor gets h^{-1} applied at the contracted slot before contracting.
inline LeafTensor psi_base_changed(const SpacedTree& t, const TreeRepresentation& a,
                                   const BaseChange& h,
                                   const std::string& split_at = "") {
  t.require_valid();
  if (t.vertex_count() == 2) {
    const auto& e = t.edges()[0];
    return a.edge(e.first, e.second);
  }
  std::string q = split_at.empty() ? t.internal_names().at(0) : split_at;
  require_input(t.has_vertex(q) && !t.is_leaf(q),
                "split vertex '" + q + "' is not internal");
  std::vector<LeafTensor> parts;
  for (const SpacedTree& b : branches_at(t, q)) {
    LeafTensor part = psi_base_changed(b, a, h);
    parts.push_back(part.apply_to_slot(part.slot_index(q), h.h_inv.at(q)));
  }
  return star_contract(parts, q, static_cast<std::uint32_t>(t.module(q)->dim()));
}

// The componentwise action of h on a representation: each edge tensor is hit
// by the given per-vertex matrices on both slots.
inline TreeRepresentation apply_vertex_maps(const SpacedTree& t,
                                            const TreeRepresentation& a,
                                            const std::map<std::string, Mat>& maps) {
  TreeRepresentation out;
  for (const auto& e : t.edges()) {
    LeafTensor x = a.edge(e.first, e.second);
    for (std::size_t i = 0; i < x.rank(); ++i)
      x = x.apply_to_slot(i, maps.at(x.slots()[i].name));
    out.set(e.first, e.second, x);
  }
  return out;
}

// Exact check of the base-change identity: psi of the changed tree equals h
// applied leafwise to psi of the inverse-changed representation.
inline bool base_change_check(const SpacedTree& t, const TreeRepresentation& a,
                              const BaseChange& h) {
  LeafTensor lhs = psi_base_changed(t, a, h);
  LeafTensor rhs = psi(t, apply_vertex_maps(t, a, h.h_inv));
  for (std::size_t i = 0; i < rhs.rank(); ++i)
    rhs = rhs.apply_to_slot(i, h.h.at(rhs.slots()[i].name));
  return lhs == rhs;
}

// Factors the edge p-r through two inserted valency-two vertices. The valid
// canonical factorisation places the original tensor on the edge at p and
// identity maps on the remaining two edges; it needs equal modules at the
// two endpoints, since the inserted vertices carry them crosswise.
struct FactoredEdge {
  SpacedTree tree;
  TreeRepresentation rep;
  std::string q1, q2;
};

inline FactoredEdge factor_edge(const SpacedTree& t, const TreeRepresentation& a,
                                const std::string& p, const std::string& r) {
  require_input(t.has_edge(p, r), "edge " + p + "-" + r + " is not in the tree");
  require_input(*t.module(p) == *t.module(r),
                "factoring edge " + p + "-" + r +
                    " needs equal modules at its endpoints");
  ValencyTwoInsertion ins = insert_valency2(t, p, r);
  TreeRepresentation b;
  for (const auto& e : t.edges()) {
    if ((e.first == p && e.second == r) || (e.first == r && e.second == p)) continue;
    b.set(e.first, e.second, a.edge(e.first, e.second));
  }
  std::size_t dim = t.module(p)->dim();
  b.set(p, ins.q1, a.edge(p, r).renamed(r, ins.q1));
  b.set(ins.q1, ins.q2, identity_tensor(ins.q1, ins.q2, dim));
  b.set(ins.q2, r, identity_tensor(ins.q2, r, dim));
  return FactoredEdge{ins.tree, std::move(b), ins.q1, ins.q2};
}

// Orbits of the group on the distinguished basis, sorted by smallest member.
inline std::vector<std::vector<std::uint32_t>> module_orbits(const GModule& v) {
  require_input(v.is_permutation(), "orbit computation needs a permutation module");
  std::vector<bool> seen(v.dim(), false);
  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint32_t b = 0; b < v.dim(); ++b) {
    if (seen[b]) continue;
    std::vector<std::uint32_t> orbit;
    for (std::uint32_t g = 0; g < v.group()->size(); ++g) {
      std::uint32_t c = v.perm(g).img[b];
      if (!seen[c]) {
        seen[c] = true;
        orbit.push_back(c);
      }
    }
    std::sort(orbit.begin(), orbit.end());
    out.push_back(std::move(orbit));
  }
  return out;
}

// A random point of the cone attached to the i-th orbit of the centre basis:
// a pure tensor with stabiliser-invariant factors, averaged over the group.
inline LeafTensor pure_cone_sample(const Star& s, std::size_t orbit_index,
                                   std::uint64_t seed, std::int64_t height = 9) {
  s.tree.require_valid();
  ModulePtr centre = s.tree.module(s.centre);
  auto orbits = module_orbits(*centre);
  require_input(orbit_index < orbits.size(),
                "invalid orbit index " + std::to_string(orbit_index) + ": centre has " +
                    std::to_string(orbits.size()) + " orbits");
  std::uint32_t b0 = orbits[orbit_index][0];
  std::vector<std::uint32_t> stab;
  for (std::uint32_t g = 0; g < s.tree.group()->size(); ++g)
    if (centre->perm(g).img[b0] == b0) stab.push_back(g);
  bool first = true;
  LeafTensor pure({}, Scalar(0));
  std::vector<ModulePtr> mods;
  for (const std::string& p : s.tree.leaf_names()) {
    ModulePtr mod = s.tree.module(p);
    mods.push_back(mod);
    auto basis = invariant_basis(*mod, stab);
    Rng rng(Rng::derive(seed, "cone:" + p));
    std::vector<Scalar> v(mod->dim(), Scalar(0));
    for (const auto& w : basis) {
      Scalar c(rng.rational(height));
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] + c * w[i];
    }
    LeafTensor factor({{p, static_cast<std::uint32_t>(mod->dim())}}, Scalar(0));
    for (std::uint32_t i = 0; i < mod->dim(); ++i) factor.at({i}) = v[i];
    pure = first ? factor : outer(pure, factor);
    first = false;
  }
  return reynolds_tensor(pure, mods);
}

}  // namespace etm
