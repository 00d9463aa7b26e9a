#pragma once

// Test-side generators and oracles. Nothing here calls into the library's
// rank or solve routines, so the checks stay independent of them.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "rankred/matrix_core.hpp"

namespace rrtest {

using rankred::Index;
using rankred::Matrix;
using rankred::Vector;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Index integer(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(gen_);
  }
  Matrix matrix(Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = uniform();
    return m;
  }
  Vector vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = uniform();
    return v;
  }
  // Small integer entries in [-k, k].
  Matrix int_matrix(Index r, Index c, int k) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j)
        m(i, j) = static_cast<double>(std::uniform_int_distribution<int>(-k, k)(gen_));
    return m;
  }
  // Rank exactly k (almost surely): product of random factors.
  Matrix low_rank(Index r, Index c, Index k) {
    if (k == 0) return Matrix::Zero(r, c);
    return matrix(r, k) * matrix(k, c);
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Exact rank of an integer matrix by fraction-free (Bareiss) elimination in
// 128-bit integers. Entries must be small integers.
inline Index exact_integer_rank(const Matrix& m) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  std::vector<std::vector<__int128>> a(static_cast<std::size_t>(rows),
                                       std::vector<__int128>(static_cast<std::size_t>(cols)));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<__int128>(m(i, j));
  Index rank = 0;
  __int128 prev = 1;
  for (Index col = 0; col < cols && rank < rows; ++col) {
    auto r = static_cast<std::size_t>(rank);
    std::size_t piv = r;
    while (piv < static_cast<std::size_t>(rows) && a[piv][static_cast<std::size_t>(col)] == 0) ++piv;
    if (piv == static_cast<std::size_t>(rows)) continue;
    std::swap(a[piv], a[r]);
    const __int128 p = a[r][static_cast<std::size_t>(col)];
    for (std::size_t i = r + 1; i < static_cast<std::size_t>(rows); ++i) {
      for (std::size_t j = static_cast<std::size_t>(col) + 1; j < static_cast<std::size_t>(cols); ++j) {
        a[i][j] = (a[i][j] * p - a[i][static_cast<std::size_t>(col)] * a[r][j]) / prev;
      }
      a[i][static_cast<std::size_t>(col)] = 0;
    }
    prev = p;
    ++rank;
  }
  return rank;
}

// Rank via a Householder QR with column pivoting, a different code path from
// the SVD the library uses.
template <typename M>
Index qr_rank(const M& m, double rel = 1e-9, double ref = 0.0) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<M> qr(m);
  const double scale = std::max(std::abs(qr.matrixR()(0, 0)), ref);
  if (scale == 0.0) return 0;
  Index k = 0;
  const Index d = std::min(m.rows(), m.cols());
  for (Index i = 0; i < d; ++i) {
    if (std::abs(qr.matrixR()(i, i)) > rel * scale) ++k;
  }
  return k;
}

// Direct rank of A + lambda B by QR, relative to the size of both terms.
inline Index direct_rank(const Matrix& a, const Matrix& b, rankred::Complex lambda,
                         double rel = 1e-9) {
  const double ref = std::max(a.norm(), std::abs(lambda) * b.norm());
  if (lambda.imag() == 0.0) return qr_rank(Matrix(a + lambda.real() * b), rel, ref);
  using CM = rankred::CMatrix;
  return qr_rank(CM(a.cast<rankred::Complex>() + lambda * b.cast<rankred::Complex>()), rel, ref);
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace rrtest
