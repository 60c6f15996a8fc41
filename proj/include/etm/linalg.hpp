#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "etm/error.hpp"
#include "etm/rational.hpp"
#include "etm/scalar.hpp"

namespace etm {

// Dense exact matrix over Scalar. Small sizes only; all arithmetic is exact.
class Mat {
 public:
  Mat() = default;
  Mat(size_t rows, size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Scalar(0)) {}

  static Mat identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = Scalar(1);
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  Scalar& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  const Scalar& operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  friend Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols_ != b.rows_) fail_internal("matrix product shape mismatch");
    Mat r(a.rows_, b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k).is_zero()) continue;
        for (size_t j = 0; j < b.cols_; ++j)
          r(i, j) = r(i, j) + a(i, k) * b(k, j);
      }
    return r;
  }

  friend Mat operator+(const Mat& a, const Mat& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) fail_internal("matrix sum shape mismatch");
    Mat r(a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] + b.data_[i];
    return r;
  }

  friend Mat operator*(const Scalar& c, const Mat& a) {
    Mat r(a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = c * a.data_[i];
    return r;
  }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  Mat transpose() const {
    Mat r(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<Scalar> data_;
};

// In-place reduced row echelon form; returns pivot column indices.
inline std::vector<size_t> rref(Mat& m) {
  std::vector<size_t> pivots;
  size_t row = 0;
  for (size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    size_t sel = row;
    while (sel < m.rows() && m(sel, col).is_zero()) ++sel;
    if (sel == m.rows()) continue;
    if (sel != row)
      for (size_t j = 0; j < m.cols(); ++j) std::swap(m(row, j), m(sel, j));
    Scalar inv = m(row, col).inverse();
    for (size_t j = col; j < m.cols(); ++j) m(row, j) = inv * m(row, j);
    for (size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col).is_zero()) continue;
      Scalar f = m(i, col);
      for (size_t j = col; j < m.cols(); ++j)
        m(i, j) = m(i, j) - f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline size_t mat_rank(Mat m) { return rref(m).size(); }

// Basis of the right kernel, one column vector per row of the result.
inline std::vector<std::vector<Scalar>> mat_kernel(Mat m) {
  std::vector<size_t> pivots = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (size_t p : pivots) is_pivot[p] = true;
  std::vector<std::vector<Scalar>> basis;
  for (size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Scalar> v(m.cols(), Scalar(0));
    v[free] = Scalar(1);
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solves A x = b exactly; empty optional when inconsistent. If the solution
// is not unique the free variables are set to zero.
inline std::optional<std::vector<Scalar>> mat_solve(const Mat& a,
                                                    const std::vector<Scalar>& b) {
  if (a.rows() != b.size()) fail_internal("solve shape mismatch");
  Mat aug(a.rows(), a.cols() + 1);
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  std::vector<size_t> pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == a.cols()) return std::nullopt;
  std::vector<Scalar> x(a.cols(), Scalar(0));
  for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, a.cols());
  return x;
}

inline std::optional<Mat> mat_inverse(const Mat& a) {
  if (a.rows() != a.cols()) fail_internal("inverse of non-square matrix");
  size_t n = a.rows();
  Mat aug(n, 2 * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = Scalar(1);
  }
  std::vector<size_t> pivots = rref(aug);
  if (pivots.size() < n || pivots[n - 1] >= n) return std::nullopt;
  Mat inv(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

inline Scalar mat_trace(const Mat& a) {
  if (a.rows() != a.cols()) fail_internal("trace of non-square matrix");
  Scalar t(0);
  for (size_t i = 0; i < a.rows(); ++i) t = t + a(i, i);
  return t;
}

// Incrementally maintained row echelon space. insert() reduces the candidate
// against the rows collected so far and reports whether the rank grew, which
// makes it the building block for rank filters over streams of vectors.
class RowSpace {
 public:
  explicit RowSpace(size_t width) : width_(width) {}

  size_t width() const { return width_; }
  size_t rank() const { return rows_.size(); }

  // Reduces v against the space. Returns true (and absorbs the reduced
  // vector) when v was independent of the rows seen before.
  bool insert(std::vector<Scalar> v) {
    if (v.size() != width_) fail_internal("row space width mismatch");
    reduce(v);
    size_t lead = 0;
    while (lead < width_ && v[lead].is_zero()) ++lead;
    if (lead == width_) return false;
    Scalar inv = v[lead].inverse();
    for (size_t j = lead; j < width_; ++j) v[j] = inv * v[j];
    for (auto& row : rows_) {
      if (row.second[lead].is_zero()) continue;
      Scalar f = row.second[lead];
      for (size_t j = lead; j < width_; ++j)
        row.second[j] = row.second[j] - f * v[j];
    }
    auto pos = std::lower_bound(
        rows_.begin(), rows_.end(), lead,
        [](const auto& row, size_t l) { return row.first < l; });
    rows_.insert(pos, {lead, std::move(v)});
    return true;
  }

  bool contains(std::vector<Scalar> v) const {
    if (v.size() != width_) fail_internal("row space width mismatch");
    reduce(v);
    for (const Scalar& c : v)
      if (!c.is_zero()) return false;
    return true;
  }

 private:
  void reduce(std::vector<Scalar>& v) const {
    for (const auto& row : rows_) {
      size_t lead = row.first;
      if (v[lead].is_zero()) continue;
      Scalar f = v[lead];
      for (size_t j = lead; j < width_; ++j)
        v[j] = v[j] - f * row.second[j];
    }
  }

  size_t width_;
  std::vector<std::pair<size_t, std::vector<Scalar>>> rows_;  // pivot, row
};

// ---- modular kernel for rational matrices ---------------------------------
//
// Kernel computation dominated by RREF over word-size primes, combined by CRT
// and lifted by rational reconstruction. Every reconstructed vector is
// verified exactly against the input, and a rank certificate over one prime
// bounds the kernel dimension from above, so the verified vectors form a
// basis whenever the count matches. Falls back to exact elimination when any
// entry is not rational.

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

inline std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  b %= p;
  while (e) {
    if (e & 1) r = mulmod_u64(r, b, p);
    b = mulmod_u64(b, b, p);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t p) {
  return powmod_u64(a, p - 2, p);
}

inline const std::vector<std::uint64_t>& kernel_primes() {
  static const std::vector<std::uint64_t> ps = [] {
    std::vector<std::uint64_t> out;
    std::uint64_t candidate = (1ull << 31) - 1;
    while (out.size() < 64) {
      bool prime = candidate > 1;
      for (std::uint64_t d = 2; d * d <= candidate && prime; ++d)
        if (candidate % d == 0) prime = false;
      if (prime) out.push_back(candidate);
      candidate -= 2;
    }
    return out;
  }();
  return ps;
}

// RREF of a matrix over F_p; returns pivot columns.
inline std::vector<size_t> rref_mod(std::vector<std::vector<std::uint64_t>>& m,
                                    std::uint64_t p) {
  std::vector<size_t> pivots;
  size_t rows = m.size(), cols = rows ? m[0].size() : 0, row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t sel = row;
    while (sel < rows && m[sel][col] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[row], m[sel]);
    std::uint64_t inv = invmod_u64(m[row][col], p);
    for (size_t j = col; j < cols; ++j) m[row][j] = mulmod_u64(m[row][j], inv, p);
    for (size_t i = 0; i < rows; ++i) {
      if (i == row || m[i][col] == 0) continue;
      std::uint64_t f = m[i][col];
      for (size_t j = col; j < cols; ++j) {
        std::uint64_t sub = mulmod_u64(f, m[row][j], p);
        m[i][j] = (m[i][j] + p - sub) % p;
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

// Rational reconstruction of x mod m with |num|, den <= sqrt(m/2).
inline bool rat_reconstruct(const mpz_class& x, const mpz_class& m, Rational& out) {
  mpz_class bound;
  mpz_sqrt(bound.get_mpz_t(), mpz_class(m / 2).get_mpz_t());
  mpz_class r0 = m, r1 = x % m, s0 = 0, s1 = 1;
  if (r1 < 0) r1 += m;
  while (r1 > bound) {
    mpz_class q = r0 / r1;
    mpz_class r2 = r0 - q * r1, s2 = s0 - q * s1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
  }
  if (s1 == 0) return false;
  mpz_class den = s1 < 0 ? mpz_class(-s1) : s1;
  if (den > bound) return false;
  mpz_class num = s1 < 0 ? mpz_class(-r1) : r1;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  if (g != 1) {
    num /= g;
    den /= g;
  }
  out = Rational(num, den);
  out.canonicalize();
  return true;
}

}  // namespace detail

// Right kernel of a rational matrix given as rows of Rational.
inline std::vector<std::vector<Rational>> rational_kernel(
    const std::vector<std::vector<Rational>>& a) {
  size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  if (cols == 0) return {};
  const auto& primes = detail::kernel_primes();

  // Reference reduction over the first usable prime fixes the pivot/free
  // split and certifies rank(F_p) <= rank(Q).
  size_t prime_at = 0;
  std::vector<size_t> pivots;
  std::vector<bool> is_pivot;
  std::vector<size_t> free_cols;
  {
    bool ok = false;
    while (prime_at < primes.size() && !ok) {
      std::uint64_t p = primes[prime_at];
      std::vector<std::vector<std::uint64_t>> mp(rows,
                                                 std::vector<std::uint64_t>(cols));
      ok = true;
      for (size_t i = 0; i < rows && ok; ++i)
        for (size_t j = 0; j < cols && ok; ++j)
          ok = rat_mod(a[i][j], p, mp[i][j]);
      if (!ok) {
        ++prime_at;
        continue;
      }
      pivots = detail::rref_mod(mp, p);
    }
    require_input(ok, "matrix denominators exhaust the modular prime pool");
    is_pivot.assign(cols, false);
    for (size_t c : pivots) is_pivot[c] = true;
    for (size_t c = 0; c < cols; ++c)
      if (!is_pivot[c]) free_cols.push_back(c);
  }
  if (free_cols.empty()) return {};

  // Accumulate CRT images of the reduced rows until every kernel vector
  // reconstructs and verifies exactly.
  size_t r = pivots.size();
  std::vector<std::vector<mpz_class>> crt(r, std::vector<mpz_class>(cols, 0));
  mpz_class modulus = 1;
  std::vector<std::vector<Rational>> result;
  for (size_t pi = prime_at; pi < primes.size(); ++pi) {
    std::uint64_t p = primes[pi];
    std::vector<std::vector<std::uint64_t>> mp(rows, std::vector<std::uint64_t>(cols));
    bool ok = true;
    for (size_t i = 0; i < rows && ok; ++i)
      for (size_t j = 0; j < cols && ok; ++j) ok = rat_mod(a[i][j], p, mp[i][j]);
    if (!ok) continue;
    std::vector<size_t> piv = detail::rref_mod(mp, p);
    if (piv != pivots) continue;  // unlucky prime

    mpz_class pz(static_cast<unsigned long>(p));
    if (modulus == 1) {
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < cols; ++j)
          crt[i][j] = mpz_class(static_cast<unsigned long>(mp[i][j]));
      modulus = pz;
    } else {
      mpz_class minv;
      mpz_invert(minv.get_mpz_t(), modulus.get_mpz_t(), pz.get_mpz_t());
      mpz_class next = modulus * pz;
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < cols; ++j) {
          mpz_class cur = crt[i][j] % pz;
          mpz_class delta = (mpz_class(static_cast<unsigned long>(mp[i][j])) - cur) % pz;
          if (delta < 0) delta += pz;
          crt[i][j] = (crt[i][j] + modulus * ((delta * minv) % pz)) % next;
        }
      modulus = next;
    }

    // Attempt reconstruction of the kernel basis from the reduced rows.
    result.clear();
    bool all_ok = true;
    for (size_t f : free_cols) {
      std::vector<Rational> v(cols, Rational(0));
      v[f] = 1;
      for (size_t i = 0; i < r && all_ok; ++i) {
        Rational val;
        if (!detail::rat_reconstruct(crt[i][f], modulus, val)) {
          all_ok = false;
          break;
        }
        v[pivots[i]] = -val;
      }
      if (!all_ok) break;
      result.push_back(std::move(v));
    }
    if (!all_ok) continue;

    // Exact verification: A v = 0 for every candidate.
    bool verified = true;
    for (const auto& v : result) {
      for (size_t i = 0; i < rows && verified; ++i) {
        Rational acc = 0;
        for (size_t j = 0; j < cols; ++j)
          if (v[j] != 0 && a[i][j] != 0) acc += a[i][j] * v[j];
        if (acc != 0) verified = false;
      }
      if (!verified) break;
    }
    if (verified) return result;
  }
  fail_internal("modular kernel did not converge");
}

// Kernel dispatch: rational matrices use the modular path, anything
// cyclotomic reduces exactly.
inline std::vector<std::vector<Scalar>> kernel_auto(const Mat& m) {
  if (m.rows() == 0) return mat_kernel(m);
  bool rational_only = true;
  for (size_t i = 0; i < m.rows() && rational_only; ++i)
    for (size_t j = 0; j < m.cols() && rational_only; ++j)
      rational_only = m(i, j).is_rational();
  if (!rational_only) return mat_kernel(m);
  std::vector<std::vector<Rational>> a(m.rows(), std::vector<Rational>(m.cols()));
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j) a[i][j] = m(i, j).as_rational();
  auto basis = rational_kernel(a);
  std::vector<std::vector<Scalar>> out;
  out.reserve(basis.size());
  for (auto& v : basis) {
    std::vector<Scalar> sv;
    sv.reserve(v.size());
    for (auto& x : v) sv.emplace_back(x);
    out.push_back(std::move(sv));
  }
  return out;
}

}  // namespace etm
