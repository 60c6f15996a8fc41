#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "etm/error.hpp"
#include "etm/group.hpp"
#include "etm/irreps.hpp"
#include "etm/linalg.hpp"
#include "etm/rational.hpp"
#include "etm/scalar.hpp"

namespace etm {

// Module of a finite group: an ordered labelled basis, the action of every
// group element (as basis permutations when possible, explicit matrices
// otherwise), and an invariant symmetric bilinear form. A based module has a
// G-stable orthonormal basis, the distinguished situation the algorithm
// requires at internal vertices.
class GModule {
 public:
  static GModule permutation_module(GroupPtr g,
                                    std::vector<std::string> basis,
                                    const std::vector<Permutation>& gen_perms,
                                    bool based = true) {
    GModule v;
    v.group_ = std::move(g);
    v.basis_ = std::move(basis);
    if (gen_perms.size() != v.group_->generators().size())
      fail_input("module needs one basis permutation per group generator");
    v.perm_.resize(v.group_->size());
    for (std::uint32_t i = 0; i < v.group_->size(); ++i) {
      Permutation p = Permutation::identity(v.basis_.size());
      std::vector<std::uint32_t> w = v.group_->word(i);
      for (std::size_t k = w.size(); k-- > 0;) p = compose(gen_perms[w[k]], p);
      v.perm_[i] = std::move(p);
    }
    v.form_ = Mat::identity(v.basis_.size());
    v.based_ = based;
    v.validate();
    return v;
  }

  // K G with the left regular action; basis labels are the element names.
  static GModule regular_module(GroupPtr g) {
    GModule v;
    v.group_ = std::move(g);
    std::size_t n = v.group_->size();
    v.basis_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) v.basis_.push_back(v.group_->element_name(i));
    v.perm_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      v.perm_[i].img.resize(n);
      for (std::uint32_t j = 0; j < n; ++j) v.perm_[i].img[j] = v.group_->mult(i, j);
    }
    v.form_ = Mat::identity(n);
    v.based_ = true;
    v.validate();
    return v;
  }

  static GModule matrix_module(GroupPtr g, std::vector<std::string> basis,
                               const std::vector<Mat>& gen_mats, Mat form,
                               bool based = false) {
    GModule v;
    v.group_ = std::move(g);
    v.basis_ = std::move(basis);
    if (gen_mats.size() != v.group_->generators().size())
      fail_input("module needs one matrix per group generator");
    std::size_t d = v.basis_.size();
    v.mats_.resize(v.group_->size());
    for (std::uint32_t i = 0; i < v.group_->size(); ++i) {
      Mat m = Mat::identity(d);
      std::vector<std::uint32_t> w = v.group_->word(i);
      for (std::size_t k = w.size(); k-- > 0;) {
        if (gen_mats[w[k]].rows() != d || gen_mats[w[k]].cols() != d)
          fail_input("module matrix dimension does not match the basis");
        m = gen_mats[w[k]] * m;
      }
      v.mats_[i] = std::move(m);
    }
    v.form_ = std::move(form);
    v.based_ = based;
    v.validate();
    return v;
  }

  const GroupPtr& group() const { return group_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<std::string>& basis() const { return basis_; }
  const std::string& label(std::size_t i) const { return basis_.at(i); }
  bool is_permutation() const { return !perm_.empty(); }
  const Permutation& perm(std::uint32_t g) const { return perm_.at(g); }
  const Mat& form() const { return form_; }
  bool based() const { return based_; }
  bool orthonormal() const { return form_ == Mat::identity(dim()); }

  Mat act_mat(std::uint32_t g) const {
    if (!perm_.empty()) return detail::permutation_matrix(perm_[g]);
    return mats_.at(g);
  }

  std::vector<Scalar> act_vec(std::uint32_t g, const std::vector<Scalar>& v) const {
    if (v.size() != dim()) fail_internal("module vector dimension mismatch");
    std::vector<Scalar> out(dim(), Scalar(0));
    if (!perm_.empty()) {
      const Permutation& p = perm_[g];
      for (std::uint32_t j = 0; j < dim(); ++j) out[p(j)] = v[j];
      return out;
    }
    const Mat& m = mats_[g];
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j) {
        if (m(i, j).is_zero() || v[j].is_zero()) continue;
        out[i] = out[i] + m(i, j) * v[j];
      }
    return out;
  }

  Scalar trace(std::uint32_t g) const {
    if (!perm_.empty()) {
      long fixed = 0;
      for (std::uint32_t j = 0; j < dim(); ++j)
        if (perm_[g](j) == j) ++fixed;
      return Scalar(fixed);
    }
    return mat_trace(mats_[g]);
  }

  // Structural equality: same group object, basis, action, form and flag.
  friend bool operator==(const GModule& a, const GModule& b) {
    if (a.group_ != b.group_ || a.basis_ != b.basis_ || a.based_ != b.based_ ||
        !(a.form_ == b.form_))
      return false;
    if (a.is_permutation() && b.is_permutation()) return a.perm_ == b.perm_;
    for (std::uint32_t g = 0; g < a.group_->size(); ++g)
      if (!(a.act_mat(g) == b.act_mat(g))) return false;
    return true;
  }

  friend GModule tensor_product(const GModule& a, const GModule& b) {
    if (a.group_ != b.group_)
      fail_input("tensor product of modules over different groups");
    GModule v;
    v.group_ = a.group_;
    std::size_t na = a.dim(), nb = b.dim();
    v.basis_.reserve(na * nb);
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j)
        v.basis_.push_back(a.basis_[i] + "." + b.basis_[j]);
    std::size_t n = v.group_->size();
    if (a.is_permutation() && b.is_permutation()) {
      v.perm_.resize(n);
      for (std::uint32_t g = 0; g < n; ++g) {
        v.perm_[g].img.resize(na * nb);
        for (std::size_t i = 0; i < na; ++i)
          for (std::size_t j = 0; j < nb; ++j)
            v.perm_[g].img[i * nb + j] =
                a.perm_[g](static_cast<std::uint32_t>(i)) * nb +
                b.perm_[g](static_cast<std::uint32_t>(j));
      }
    } else {
      v.mats_.resize(n);
      for (std::uint32_t g = 0; g < n; ++g) {
        Mat ma = a.act_mat(g), mb = b.act_mat(g);
        Mat m(na * nb, na * nb);
        for (std::size_t i = 0; i < na; ++i)
          for (std::size_t k = 0; k < na; ++k) {
            if (ma(i, k).is_zero()) continue;
            for (std::size_t j = 0; j < nb; ++j)
              for (std::size_t l = 0; l < nb; ++l) {
                if (mb(j, l).is_zero()) continue;
                m(i * nb + j, k * nb + l) = ma(i, k) * mb(j, l);
              }
          }
        v.mats_[g] = std::move(m);
      }
    }
    if (a.orthonormal() && b.orthonormal()) {
      v.form_ = Mat::identity(na * nb);
    } else {
      Mat f(na * nb, na * nb);
      for (std::size_t i = 0; i < na; ++i)
        for (std::size_t k = 0; k < na; ++k) {
          if (a.form_(i, k).is_zero()) continue;
          for (std::size_t j = 0; j < nb; ++j)
            for (std::size_t l = 0; l < nb; ++l)
              f(i * nb + j, k * nb + l) = a.form_(i, k) * b.form_(j, l);
        }
      v.form_ = std::move(f);
    }
    v.based_ = a.based_ && b.based_;
    v.validate();
    return v;
  }

 private:
  GModule() = default;

  void validate() const {
    if (basis_.empty()) fail_input("module needs a non-empty basis");
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i].empty()) fail_input("module basis labels must be non-empty");
      for (std::size_t j = i + 1; j < basis_.size(); ++j)
        if (basis_[i] == basis_[j])
          fail_input("duplicate basis label '" + basis_[i] + "'");
    }
    std::size_t n = group_->size();
    if (!perm_.empty()) {
      if (!perm_[0].is_identity())
        fail_input("module action does not fix the identity element");
      for (const Permutation& p : perm_)
        if (p.degree() != dim() || !is_valid_permutation(p))
          fail_input("module action is not by basis permutations");
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
          if (!(compose(perm_[i], perm_[j]) == perm_[group_->mult(i, j)]))
            fail_input("module action does not respect the group relations");
    } else {
      if (!(mats_[0] == Mat::identity(dim())))
        fail_input("module action does not fix the identity element");
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
          if (!(mats_[i] * mats_[j] == mats_[group_->mult(i, j)]))
            fail_input("module action does not respect the group relations");
    }
    if (form_.rows() != dim() || form_.cols() != dim())
      fail_input("bilinear form dimension does not match the basis");
    if (!(form_ == form_.transpose()))
      fail_input("bilinear form is not symmetric");
    if (!mat_inverse(form_))
      fail_input("bilinear form is degenerate");
    for (const Permutation& gp : group_->generators()) {
      std::uint32_t g = group_->index_of(gp);
      Mat m = act_mat(g);
      if (!(m.transpose() * (form_ * m) == form_))
        fail_input("bilinear form is not invariant under the group action");
    }
    if (based_ && (perm_.empty() || !orthonormal()))
      fail_input("a based module needs a permutation action on an orthonormal basis");
  }

  GroupPtr group_;
  std::vector<std::string> basis_;
  std::vector<Permutation> perm_;
  std::vector<Mat> mats_;
  Mat form_;
  bool based_ = false;
};

using ModulePtr = std::shared_ptr<const GModule>;

inline ModulePtr share(GModule v) {
  return std::make_shared<const GModule>(std::move(v));
}

inline ModulePtr tensor_product(const std::vector<ModulePtr>& factors) {
  if (factors.empty()) fail_internal("tensor product of no modules");
  GModule acc = *factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i)
    acc = tensor_product(acc, *factors[i]);
  return share(std::move(acc));
}

// Projection onto the invariants of a subgroup (given by element indices):
// the average of the subgroup translates.
inline std::vector<Scalar> reynolds_subgroup(const GModule& v,
                                             const std::vector<std::uint32_t>& sub,
                                             const std::vector<Scalar>& x) {
  if (sub.empty()) fail_internal("reynolds over an empty subgroup");
  std::vector<Scalar> sum(v.dim(), Scalar(0));
  for (std::uint32_t g : sub) {
    std::vector<Scalar> t = v.act_vec(g, x);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = sum[i] + t[i];
  }
  Scalar inv = Scalar(static_cast<long>(sub.size())).inverse();
  for (Scalar& c : sum) c = inv * c;
  return sum;
}

inline std::vector<Scalar> reynolds(const GModule& v, const std::vector<Scalar>& x) {
  return reynolds_subgroup(v, v.group()->all_indices(), x);
}

// Multiplicity of each irrep in v via the exact character inner product.
inline std::vector<std::uint32_t> multiplicities(const GModule& v,
                                                 const std::vector<Irrep>& irreps) {
  const FiniteGroup& g = *v.group();
  Scalar inv_order = Scalar(static_cast<long>(g.size())).inverse();
  std::vector<std::uint32_t> out;
  out.reserve(irreps.size());
  std::size_t total = 0;
  for (const Irrep& ir : irreps) {
    Scalar sum(0);
    for (std::uint32_t i = 0; i < g.size(); ++i)
      sum = sum + ir.character(g.inv(i)) * v.trace(i);
    sum = inv_order * sum;
    if (!sum.is_rational() || !rat_is_integer(sum.as_rational()) ||
        sum.as_rational() < 0)
      fail_input("inconsistent irrep table: multiplicity of '" + ir.label() +
                 "' is not a non-negative integer");
    std::uint32_t m = static_cast<std::uint32_t>(sum.as_rational().get_num().get_si());
    out.push_back(m);
    total += m * ir.dim();
  }
  if (total != v.dim())
    fail_input("irrep table does not decompose the module: multiplicities cover dimension " +
               std::to_string(total) + " of " + std::to_string(v.dim()));
  return out;
}

// Basis of the subspace fixed by a subgroup: Reynolds images of the basis
// vectors, filtered by rank in scan order, each normalised so its first
// nonzero coordinate is 1.
inline std::vector<std::vector<Scalar>> invariant_basis(
    const GModule& v, const std::vector<std::uint32_t>& sub) {
  RowSpace space(v.dim());
  std::vector<std::vector<Scalar>> out;
  for (std::size_t j = 0; j < v.dim(); ++j) {
    std::vector<Scalar> e(v.dim(), Scalar(0));
    e[j] = Scalar(1);
    std::vector<Scalar> w = reynolds_subgroup(v, sub, e);
    if (!space.insert(w)) continue;
    std::size_t lead = 0;
    while (w[lead].is_zero()) ++lead;
    Scalar inv = w[lead].inverse();
    for (Scalar& c : w) c = inv * c;
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<std::vector<Scalar>> invariant_basis(const GModule& v) {
  return invariant_basis(v, v.group()->all_indices());
}

// Weight vector: a common eigenvector of an abelian group, tagged by the
// index of its character in the canonical irrep order.
struct WeightVector {
  std::uint32_t chr;
  std::vector<Scalar> coords;
};

// Decomposes a module of an abelian group into one-dimensional weight
// spaces: for each character the projection (1/|G|) sum_g chr(g)^{-1} g is
// applied to the basis vectors and the images are rank-filtered and
// normalised exactly like invariant_basis. The result lists characters in
// canonical order and spans the whole module.
inline std::vector<WeightVector> weight_basis(const GModule& v,
                                              const std::vector<Irrep>& irreps) {
  const FiniteGroup& g = *v.group();
  if (!g.abelian()) fail_input("weight basis requires an abelian group");
  Scalar inv_order = Scalar(static_cast<long>(g.size())).inverse();
  std::vector<WeightVector> out;
  for (std::uint32_t c = 0; c < irreps.size(); ++c) {
    const Irrep& chr = irreps[c];
    RowSpace space(v.dim());
    for (std::size_t j = 0; j < v.dim(); ++j) {
      std::vector<Scalar> e(v.dim(), Scalar(0));
      e[j] = Scalar(1);
      std::vector<Scalar> sum(v.dim(), Scalar(0));
      for (std::uint32_t i = 0; i < g.size(); ++i) {
        std::vector<Scalar> t = v.act_vec(i, e);
        Scalar w = chr.character(g.inv(i));
        for (std::size_t k = 0; k < sum.size(); ++k)
          sum[k] = sum[k] + w * t[k];
      }
      for (Scalar& x : sum) x = inv_order * x;
      if (!space.insert(sum)) continue;
      std::size_t lead = 0;
      while (sum[lead].is_zero()) ++lead;
      Scalar inv = sum[lead].inverse();
      for (Scalar& x : sum) x = inv * x;
      out.push_back({c, std::move(sum)});
    }
  }
  if (out.size() != v.dim())
    fail_internal("weight basis does not span the module");
  return out;
}

}  // namespace etm
