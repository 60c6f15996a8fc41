#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "etm/error.hpp"
#include "etm/gmodule.hpp"
#include "etm/irreps.hpp"
#include "etm/linalg.hpp"

namespace etm {

// Basis of the intertwiner space Hom_G(M_w, V) for one irrep: elementary
// maps are averaged, rho(E) = (1/|G|) sum_g act_V(g) E M_w(g)^{-1}, scanning
// E over (module basis index, irrep coordinate) in that order, keeping the
// images that grow the rank and normalising each so its first nonzero entry
// in row-major order is 1. The count always equals the multiplicity.
inline std::vector<Mat> intertwiners(const GModule& v, const Irrep& ir,
                                     std::uint32_t expected) {
  const FiniteGroup& g = *v.group();
  std::size_t dv = v.dim(), dw = ir.dim();
  Scalar inv_order = Scalar(static_cast<long>(g.size())).inverse();
  RowSpace space(dv * dw);
  std::vector<Mat> out;
  for (std::size_t j = 0; j < dv && out.size() < expected; ++j) {
    std::vector<Scalar> e(dv, Scalar(0));
    e[j] = Scalar(1);
    for (std::size_t d = 0; d < dw && out.size() < expected; ++d) {
      Mat avg(dv, dw);
      for (std::uint32_t gi = 0; gi < g.size(); ++gi) {
        std::vector<Scalar> col = v.act_vec(gi, e);
        const Mat& minv = ir.mat(g.inv(gi));
        for (std::size_t r = 0; r < dv; ++r) {
          if (col[r].is_zero()) continue;
          for (std::size_t c = 0; c < dw; ++c) {
            if (minv(d, c).is_zero()) continue;
            avg(r, c) = avg(r, c) + col[r] * minv(d, c);
          }
        }
      }
      std::vector<Scalar> flat(dv * dw);
      for (std::size_t r = 0; r < dv; ++r)
        for (std::size_t c = 0; c < dw; ++c) flat[r * dw + c] = inv_order * avg(r, c);
      if (!space.insert(flat)) continue;
      std::size_t lead = 0;
      while (flat[lead].is_zero()) ++lead;
      Scalar norm = flat[lead].inverse();
      Mat theta(dv, dw);
      for (std::size_t r = 0; r < dv; ++r)
        for (std::size_t c = 0; c < dw; ++c) theta(r, c) = norm * flat[r * dw + c];
      out.push_back(std::move(theta));
    }
  }
  if (out.size() != expected)
    fail_internal("intertwiner count " + std::to_string(out.size()) +
                  " does not match multiplicity " + std::to_string(expected));
  return out;
}

// Assembly isomorphism of a module: columns are the intertwiner images of
// the model irrep basis vectors, ordered by (irrep, copy, irrep coordinate).
// Inverting it yields the projections that read off block coordinates.
struct Assembly {
  std::vector<std::uint32_t> mult;           // per irrep
  std::vector<std::vector<Mat>> theta;       // theta[i][b]: dim x dim(w_i)
  std::vector<std::size_t> offset;           // column offset per irrep
  Mat phi, phi_inv;

  std::size_t col(std::size_t i, std::size_t b, std::size_t d,
                  const std::vector<Irrep>& irreps) const {
    return offset[i] + b * irreps[i].dim() + d;
  }
};

inline Assembly assemble(const GModule& v, const std::vector<Irrep>& irreps) {
  Assembly a;
  a.mult = multiplicities(v, irreps);
  a.theta.resize(irreps.size());
  a.offset.resize(irreps.size());
  a.phi = Mat(v.dim(), v.dim());
  std::size_t off = 0;
  for (std::size_t i = 0; i < irreps.size(); ++i) {
    a.offset[i] = off;
    a.theta[i] = intertwiners(v, irreps[i], a.mult[i]);
    std::size_t d = irreps[i].dim();
    for (std::size_t b = 0; b < a.theta[i].size(); ++b)
      for (std::size_t dd = 0; dd < d; ++dd)
        for (std::size_t r = 0; r < v.dim(); ++r)
          a.phi(r, off + b * d + dd) = a.theta[i][b](r, dd);
    off += a.mult[i] * d;
  }
  if (off != v.dim()) fail_internal("assembly does not fill the module");
  auto inv = mat_inverse(a.phi);
  if (!inv) fail_internal("assembly isomorphism is singular");
  a.phi_inv = std::move(*inv);
  return a;
}

// Block coordinates on Hom_G(U, V): an equivariant map U -> V written in the
// module bases corresponds, via the assembly isomorphisms on both sides, to
// one m(w_i, V) x m(w_i, U) matrix per irrep. For orthonormal bases the
// matrix entries of a map are simultaneously the coordinates of the
// corresponding tensor in V (x) U, so this doubles as the coordinate system
// on the G-invariants of that tensor product.
class HomBlocks {
 public:
  HomBlocks(const GModule& u, const GModule& v, const std::vector<Irrep>& irreps)
      : irreps_(&irreps),
        dim_u_(u.dim()),
        dim_v_(v.dim()),
        au_(assemble(u, irreps)),
        av_(assemble(v, irreps)) {
    if (!u.orthonormal() || !v.orthonormal())
      fail_input("block coordinates need orthonormal module bases");
    if (u.group() != v.group())
      fail_input("block coordinates need modules over the same group");
  }

  std::size_t irrep_count() const { return irreps_->size(); }
  std::uint32_t rows(std::size_t i) const { return av_.mult[i]; }
  std::uint32_t cols(std::size_t i) const { return au_.mult[i]; }
  std::size_t dim_u() const { return dim_u_; }
  std::size_t dim_v() const { return dim_v_; }

  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < irreps_->size(); ++i) n += rows(i) * static_cast<std::size_t>(cols(i));
    return n;
  }

  // Blocks of an equivariant map (dim V x dim U matrix). Verifies that the
  // conjugated matrix really is block diagonal of the expected shape, so a
  // non-equivariant argument is rejected rather than silently projected.
  std::vector<Mat> blocks_of(const Mat& f) const {
    if (f.rows() != dim_v_ || f.cols() != dim_u_)
      fail_internal("map dimensions do not match the block coordinate system");
    Mat fhat = av_.phi_inv * (f * au_.phi);
    std::vector<Mat> out;
    out.reserve(irreps_->size());
    for (std::size_t i = 0; i < irreps_->size(); ++i) {
      Mat b(rows(i), cols(i));
      for (std::size_t a = 0; a < rows(i); ++a)
        for (std::size_t c = 0; c < cols(i); ++c)
          b(a, c) = fhat(av_.col(i, a, 0, *irreps_), au_.col(i, c, 0, *irreps_));
      out.push_back(std::move(b));
    }
    for (std::size_t ri = 0; ri < dim_v_; ++ri)
      for (std::size_t ci = 0; ci < dim_u_; ++ci) {
        auto [i1, a, d1] = locate(av_, ri);
        auto [i2, c, d2] = locate(au_, ci);
        Scalar expect =
            (i1 == i2 && d1 == d2) ? out[i1](a, c) : Scalar(0);
        if (!(fhat(ri, ci) == expect))
          fail_input("map is not equivariant: block structure violated");
      }
    return out;
  }

  Mat map_of(const std::vector<Mat>& blocks) const {
    if (blocks.size() != irreps_->size())
      fail_internal("block count mismatch");
    Mat fhat(dim_v_, dim_u_);
    for (std::size_t i = 0; i < irreps_->size(); ++i) {
      if (blocks[i].rows() != rows(i) || blocks[i].cols() != cols(i))
        fail_internal("block shape mismatch");
      std::size_t d = (*irreps_)[i].dim();
      for (std::size_t a = 0; a < rows(i); ++a)
        for (std::size_t c = 0; c < cols(i); ++c)
          for (std::size_t dd = 0; dd < d; ++dd)
            fhat(av_.col(i, a, dd, *irreps_), au_.col(i, c, dd, *irreps_)) =
                blocks[i](a, c);
    }
    return av_.phi * (fhat * au_.phi_inv);
  }

  // The map whose blocks are zero except for a single 1 in block i at (a, b);
  // equivalently the basis tensor of the block coordinate system.
  Mat basis_tensor(std::size_t i, std::size_t a, std::size_t b) const {
    const Mat& theta = av_.theta[i][a];
    std::size_t d = (*irreps_)[i].dim();
    Mat out(dim_v_, dim_u_);
    for (std::size_t r = 0; r < dim_v_; ++r)
      for (std::size_t c = 0; c < dim_u_; ++c) {
        Scalar s(0);
        for (std::size_t dd = 0; dd < d; ++dd)
          s = s + theta(r, dd) * au_.phi_inv(au_.col(i, b, dd, *irreps_), c);
        out(r, c) = s;
      }
    return out;
  }

  const Assembly& assembly_u() const { return au_; }
  const Assembly& assembly_v() const { return av_; }

 private:
  static std::tuple<std::size_t, std::size_t, std::size_t> locate(
      const Assembly& a, std::size_t col) {
    for (std::size_t i = a.offset.size(); i-- > 0;) {
      if (col < a.offset[i]) continue;
      std::size_t rel = col - a.offset[i];
      std::size_t d = a.theta[i].empty() ? 1 : a.theta[i][0].cols();
      return {i, rel / d, rel % d};
    }
    fail_internal("assembly column out of range");
  }

  const std::vector<Irrep>* irreps_;
  std::size_t dim_u_, dim_v_;
  Assembly au_, av_;
};

}  // namespace etm
