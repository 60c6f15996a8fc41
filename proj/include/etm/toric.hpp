#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "etm/coords.hpp"
#include "etm/error.hpp"
#include "etm/gmodule.hpp"
#include "etm/irreps.hpp"
#include "etm/model.hpp"
#include "etm/polynomial.hpp"
#include "etm/tensor.hpp"
#include "etm/tree.hpp"
#include "etm/vartable.hpp"

#include "json.hpp"

namespace etm {

// Generic equivariant edge tensors of a tree over an abelian group: every
// edge tensor is an unknown linear combination of weight pairs with inverse
// characters, one parameter variable per pair. Variables are named
// a[p-q,u,v] where u and v are the weight labels on the two sides, with the
// same #k copy suffixes the coordinate systems use.
struct SymbolicParameters {
  VarTablePtr table;
  SymbolicRepresentation rep;
};

inline SymbolicParameters symbolic_parameters(const SpacedTree& t) {
  t.require_valid();
  require_input(t.group()->abelian(), "symbolic edge parameters need an abelian group");
  std::vector<Irrep> irreps = builtin_irreps(*t.group());
  const FiniteGroup& g = *t.group();

  std::map<std::string, detail::LeafWeightData> weights;
  for (const std::string& p : t.names())
    weights.emplace(p, detail::leaf_weight_data(*t.module(p), irreps));
  auto inverse_pair = [&](std::uint32_t a, std::uint32_t b) {
    for (std::uint32_t e = 0; e < g.size(); ++e)
      if (!(irreps[a].character(e) * irreps[b].character(e)).is_one()) return false;
    return true;
  };

  std::vector<Var> vars;
  for (const auto& e : t.edges()) {
    const auto& wp = weights.at(e.first);
    const auto& wq = weights.at(e.second);
    for (std::size_t i = 0; i < wp.vecs.size(); ++i)
      for (std::size_t j = 0; j < wq.vecs.size(); ++j)
        if (inverse_pair(wp.vecs[i].chr, wq.vecs[j].chr))
          vars.push_back({"a", {e.first + "-" + e.second, wp.labels[i], wq.labels[j]}});
  }
  SymbolicParameters out;
  out.table = VarTable::make(std::move(vars));

  std::size_t k = 0;
  for (const auto& e : t.edges()) {
    const auto& wp = weights.at(e.first);
    const auto& wq = weights.at(e.second);
    std::uint32_t dp = static_cast<std::uint32_t>(t.module(e.first)->dim());
    std::uint32_t dq = static_cast<std::uint32_t>(t.module(e.second)->dim());
    GenTensor<Polynomial> x({{e.first, dp}, {e.second, dq}}, Polynomial::zero(out.table));
    for (std::size_t i = 0; i < wp.vecs.size(); ++i)
      for (std::size_t j = 0; j < wq.vecs.size(); ++j) {
        if (!inverse_pair(wp.vecs[i].chr, wq.vecs[j].chr)) continue;
        Polynomial a = Polynomial::variable(out.table, k++);
        for (std::uint32_t r = 0; r < dp; ++r) {
          const Scalar& vr = wp.vecs[i].coords[r];
          if (vr.is_zero()) continue;
          for (std::uint32_t c = 0; c < dq; ++c) {
            const Scalar& wc = wq.vecs[j].coords[c];
            if (wc.is_zero()) continue;
            x.at({r, c}) = x.at({r, c}) + (vr * wc) * a;
          }
        }
      }
    out.rep.set(e.first, e.second, x);
  }
  return out;
}

// Numeric representation obtained by substituting values for the parameters.
inline TreeRepresentation instantiate(const SpacedTree& t, const SymbolicParameters& sp,
                                      const std::vector<Scalar>& values) {
  require_input(values.size() == sp.table->size(),
                "parameter vector has the wrong arity");
  TreeRepresentation out;
  for (const auto& e : t.edges()) {
    const GenTensor<Polynomial>& x = sp.rep.edge(e.first, e.second);
    std::vector<LeafTensor::Slot> slots;
    for (const auto& s : x.slots()) slots.push_back({s.name, s.dim});
    LeafTensor y(slots, Scalar(0));
    for (std::size_t i = 0; i < x.size(); ++i) y.coords()[i] = x.coords()[i].eval(values);
    out.set(e.first, e.second, y);
  }
  return out;
}

// Monomial parametrisation data: row i states that the i-th invariant
// coordinate of the model map, with fully symbolic equivariant edge tensors,
// equals prefactors[i] times the parameter monomial with exponents rows[i].
struct ExponentMatrix {
  VarTablePtr coords;
  VarTablePtr params;
  std::vector<Monomial> rows;
  std::vector<Scalar> prefactors;

  std::size_t row_count() const { return rows.size(); }
  std::size_t col_count() const { return params->size(); }
};

inline Scalar exponent_row_value(const ExponentMatrix& e, std::size_t row,
                                 const std::vector<Scalar>& values) {
  require_input(row < e.rows.size(), "exponent row out of range");
  require_input(values.size() == e.params->size(),
                "parameter vector has the wrong arity");
  Scalar acc = e.prefactors[row];
  for (std::size_t j = 0; j < values.size(); ++j)
    if (e.rows[row][j] != 0) acc = acc * values[j].pow(e.rows[row][j]);
  return acc;
}

// Either an exponent matrix or the first invariant coordinate that is not a
// single scaled monomial, reported by name with its full symbolic value.
struct MonomialCertificate {
  bool success = false;
  ExponentMatrix matrix;
  std::string witness;
  Polynomial witness_value;
};

// Certifies the monomial parametrisation of a tree model. Requires an
// abelian group and a single group orbit on the distinguished basis of every
// internal vertex; those are input errors, while a coordinate that fails to
// be a monomial despite them is reported as a witness, not thrown.
inline MonomialCertificate monomial_certificate(const SpacedTree& t) {
  t.require_valid();
  require_input(t.group()->abelian(), "monomial certificate needs an abelian group");
  for (const std::string& p : t.internal_names()) {
    const GModule& m = *t.module(p);
    require_input(m.is_permutation(),
                  "internal vertex '" + p + "' does not carry a permutation basis");
    require_input(module_orbits(m).size() == 1,
                  "the basis of internal vertex '" + p + "' is not a single orbit");
  }
  SymbolicParameters sp = symbolic_parameters(t);
  GenTensor<Polynomial> big = psi(t, sp.rep);
  CoordSystem cs = invariant_coords(t, builtin_irreps(*t.group()));
  std::vector<Polynomial> zs = cs.coords_of(big);

  MonomialCertificate out;
  out.matrix.coords = cs.table;
  out.matrix.params = sp.table;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (zs[i].term_count() != 1) {
      out.witness = cs.table->name(i);
      out.witness_value = zs[i];
      return out;
    }
    const auto& [mono, coeff] = *zs[i].terms().begin();
    out.matrix.rows.push_back(mono);
    out.matrix.prefactors.push_back(coeff);
  }
  out.success = true;
  return out;
}

// Image of a coordinate monomial in the parameters: summed exponent rows and
// the product of the matching prefactor powers.
inline std::vector<std::uint64_t> parameter_image(const ExponentMatrix& e,
                                                  const Monomial& m) {
  std::vector<std::uint64_t> img(e.params->size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    for (std::size_t j = 0; j < img.size(); ++j)
      img[j] += static_cast<std::uint64_t>(m[i]) * e.rows[i][j];
  }
  return img;
}

inline Scalar parameter_prefactor(const ExponentMatrix& e, const Monomial& m) {
  Scalar acc(1);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] != 0) acc = acc * e.prefactors[i].pow(m[i]);
  return acc;
}

// True iff the two-term polynomial vanishes identically on the monomial
// parametrisation: the terms must map to the same parameter monomial and
// their coefficients must cancel after prefactor adjustment.
inline bool binomial_check(const Polynomial& b, const ExponentMatrix& e) {
  Polynomial f = poly_retable_by_name(b, e.coords);
  require_input(f.term_count() == 2, "binomial check needs exactly two terms");
  auto it = f.terms().begin();
  const auto& [m1, c1] = *it;
  ++it;
  const auto& [m2, c2] = *it;
  if (parameter_image(e, m1) != parameter_image(e, m2)) return false;
  return (c1 * parameter_prefactor(e, m1) + c2 * parameter_prefactor(e, m2)).is_zero();
}

namespace detail {

inline void enumerate_monomials(std::size_t n, unsigned d, Monomial& cur,
                                std::size_t pos, unsigned used, std::size_t budget,
                                std::vector<Monomial>& out) {
  if (pos == n) {
    if (used > 0) {
      if (out.size() >= budget)
        fail_input("enumeration budget of " + std::to_string(budget) +
                   " monomials exceeded");
      out.push_back(cur);
    }
    return;
  }
  for (unsigned e = 0; e + used <= d; ++e) {
    cur[pos] = e;
    enumerate_monomials(n, d, cur, pos + 1, used + e, budget, out);
  }
  cur[pos] = 0;
}

}  // namespace detail

// All binomials b = P2 m1 - P1 m2 with both monomials of degree at most d
// and equal parameter images, monic and canonically ordered. Exhaustive over
// monomial pairs, so the list is sound and complete up to the degree bound.
inline std::vector<Polynomial> lattice_relations_up_to_degree(
    const ExponentMatrix& e, unsigned d, std::size_t budget = 200000) {
  require_input(d >= 1, "degree bound must be at least 1");
  std::size_t n = e.coords->size();
  std::vector<Monomial> monos;
  Monomial cur(n, 0);
  detail::enumerate_monomials(n, d, cur, 0, 0, budget, monos);

  std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < monos.size(); ++i)
    buckets[parameter_image(e, monos[i])].push_back(i);

  std::vector<Polynomial> out;
  for (const auto& [img, members] : buckets) {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (out.size() >= budget)
          fail_input("enumeration budget of " + std::to_string(budget) +
                     " binomials exceeded");
        const Monomial& m1 = monos[members[a]];
        const Monomial& m2 = monos[members[b]];
        Polynomial f = Polynomial::zero(e.coords);
        f.add_term(m1, parameter_prefactor(e, m2));
        f.add_term(m2, -parameter_prefactor(e, m1));
        if (!f.is_zero()) out.push_back(f.monic());
      }
  }
  std::sort(out.begin(), out.end(), [](const Polynomial& a, const Polynomial& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.to_string() < b.to_string();
  });
  return out;
}

// Integer CSV of the exponent rows, one line per invariant coordinate.
inline std::string exponent_matrix_csv(const ExponentMatrix& e) {
  std::string out;
  for (const Monomial& row : e.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(row[j]);
    }
    out += '\n';
  }
  return out;
}

// JSON header naming the CSV rows and columns and listing the prefactors.
inline std::string exponent_matrix_header(const ExponentMatrix& e) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  j["prefactors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < e.row_count(); ++i) {
    j["rows"].push_back(e.coords->name(i));
    j["prefactors"].push_back(e.prefactors[i].to_string());
  }
  j["cols"] = nlohmann::json::array();
  for (std::size_t i = 0; i < e.col_count(); ++i) j["cols"].push_back(e.params->name(i));
  return j.dump(2);
}

}  // namespace etm
