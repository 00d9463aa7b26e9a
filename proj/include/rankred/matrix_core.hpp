#pragma once

// Dense real-matrix kernels with explicit tolerance contracts.
//
// Rank, null spaces and minimum-norm solves go through Eigen's SVD. The
// echelon forms use hand-rolled Gaussian elimination with complete pivoting
// because the pencil stages need the accumulated transforms, not just ranks.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankred/tolerance.hpp"

namespace rankred {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Raised when an iterative kernel fails to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Vector ones(Index n) { return Vector::Ones(n); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(what + " contains non-finite entries");
  }
}

/// Builds a matrix from rows; rejects empty, ragged or non-finite input.
inline Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("matrix must have at least one row and one column");
  }
  const auto cols = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw std::invalid_argument("ragged matrix: row " + std::to_string(i) + " has " +
                                  std::to_string(rows[i].size()) + " entries, expected " +
                                  std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!std::isfinite(rows[i][j])) {
        throw std::invalid_argument("matrix entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") is not finite");
      }
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) {
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
  }
  return rows;
}

namespace detail {

template <typename Derived>
Vector singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  if (m.rows() == 0 || m.cols() == 0) {
    return Vector{};
  }
  Eigen::JacobiSVD<Plain> svd(m);
  return svd.singularValues();
}

inline Index count_above(const Vector& sv, double rel_tol, double ref_scale = 0.0) {
  if (sv.size() == 0) {
    return 0;
  }
  const double threshold = rel_tol * std::max(sv(0), ref_scale);
  if (threshold == 0.0 && sv(0) == 0.0) {
    return 0;
  }
  Index k = 0;
  while (k < sv.size() && sv(k) > threshold) {
    ++k;
  }
  return k;
}

}  // namespace detail

/// Numerical rank: singular values above tol.rank_tol times the largest.
/// Works for real and complex matrices. When M is a difference of larger
/// terms (A + B, C - 1u^T), pass their magnitude as `ref_scale` so that
/// cancellation down to rounding noise reads as rank loss.
template <typename Derived>
Index rank(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {},
           double ref_scale = 0.0) {
  const Vector sv = detail::singular_values(m);
  return detail::count_above(sv,
                             tol.effective_rank_tol(static_cast<std::size_t>(m.rows()),
                                                    static_cast<std::size_t>(m.cols())),
                             ref_scale);
}

/// Minimum-norm solution of Mx = b, or nullopt when b is not in colspan(M).
inline std::optional<Vector> solve(const Matrix& m, const Vector& b, const Tolerance& tol = {}) {
  if (b.size() != m.rows()) {
    throw std::invalid_argument("solve: right-hand side length does not match matrix rows");
  }
  Vector x = Vector::Zero(m.cols());
  if (m.rows() > 0 && m.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const Index k = detail::count_above(
        sv, tol.effective_rank_tol(static_cast<std::size_t>(m.rows()),
                                   static_cast<std::size_t>(m.cols())));
    if (k > 0) {
      const Vector coeffs = (svd.matrixU().leftCols(k).transpose() * b).cwiseQuotient(sv.head(k));
      x = svd.matrixV().leftCols(k) * coeffs;
    }
  }
  const double residual = (m * x - b).norm();
  if (residual > tol.residual_tol * (1.0 + b.norm())) {
    return std::nullopt;
  }
  return x;
}

/// Augmented-rank membership test: rank([M | z]) == rank(M).
inline bool in_column_span(const Matrix& m, const Vector& z, const Tolerance& tol = {}) {
  if (z.size() != m.rows()) {
    throw std::invalid_argument("in_column_span: vector length does not match matrix rows");
  }
  Matrix aug(m.rows(), m.cols() + 1);
  aug << m, z;
  return rank(aug, tol) == rank(m, tol);
}

/// Orthonormal basis of null(M): cols - rank(M) vectors.
inline std::vector<Vector> nullspace_basis(const Matrix& m, const Tolerance& tol = {}) {
  std::vector<Vector> basis;
  if (m.cols() == 0) {
    return basis;
  }
  if (m.rows() == 0) {
    for (Index j = 0; j < m.cols(); ++j) {
      basis.push_back(Vector::Unit(m.cols(), j));
    }
    return basis;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index k = detail::count_above(
      svd.singularValues(),
      tol.effective_rank_tol(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())));
  for (Index j = k; j < m.cols(); ++j) {
    basis.push_back(svd.matrixV().col(j));
  }
  return basis;
}

/// Values lambda where M + lambda*I is singular, i.e. the negated standard
/// eigenvalues of M, with algebraic multiplicity. Sorted by real part then
/// imaginary part, so conjugate pairs are adjacent.
inline std::vector<Complex> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("eigenvalues: matrix must be square");
  }
  std::vector<Complex> out;
  if (m.rows() == 0) {
    return out;
  }
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigenvalues: QR iteration failed to converge");
  }
  const auto& ev = es.eigenvalues();
  out.reserve(static_cast<std::size_t>(ev.size()));
  for (Index i = 0; i < ev.size(); ++i) {
    out.push_back(-ev(i));
  }
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

/// left * original * right == reduced.
struct EchelonResult {
  Matrix reduced;
  Matrix left;
  Matrix right;
  Index pivot_count = 0;
};

/// Row echelon form by Gaussian elimination with complete pivoting.
/// `right` is a column permutation; `reduced` is upper trapezoidal with
/// exactly `pivot_count` nonzero rows. Pivots at or below
/// rank_tol * (largest entry) terminate the elimination. A block cut out of a
/// larger matrix passes that matrix's magnitude as `ref_scale`, so a block of
/// pure rounding noise is not mistaken for a full-rank one.
inline EchelonResult row_echelon_with_transforms(const Matrix& m, const Tolerance& tol = {},
                                                 double ref_scale = 0.0) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  EchelonResult res{m, Matrix::Identity(rows, rows), Matrix::Identity(cols, cols), 0};
  Matrix& u = res.reduced;
  const double scale =
      rows * cols > 0 ? std::max(m.cwiseAbs().maxCoeff(), ref_scale) : 0.0;
  const double threshold =
      tol.effective_rank_tol(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)) * scale;

  Index k = 0;
  for (; k < std::min(rows, cols); ++k) {
    Index pi = k;
    Index pj = k;
    double best = -1.0;
    for (Index i = k; i < rows; ++i) {
      for (Index j = k; j < cols; ++j) {
        if (std::abs(u(i, j)) > best) {
          best = std::abs(u(i, j));
          pi = i;
          pj = j;
        }
      }
    }
    if (scale == 0.0 || best <= threshold) {
      break;
    }
    if (pi != k) {
      u.row(k).swap(u.row(pi));
      res.left.row(k).swap(res.left.row(pi));
    }
    if (pj != k) {
      u.col(k).swap(u.col(pj));
      res.right.col(k).swap(res.right.col(pj));
    }
    for (Index i = k + 1; i < rows; ++i) {
      const double f = u(i, k) / u(k, k);
      if (f != 0.0) {
        u.row(i) -= f * u.row(k);
        res.left.row(i) -= f * res.left.row(k);
      }
      u(i, k) = 0.0;
    }
  }
  res.pivot_count = k;
  u.bottomRows(rows - k).setZero();
  return res;
}

/// Column echelon form: the transpose dual of row_echelon_with_transforms.
/// `left` is a row permutation; `reduced` is lower trapezoidal with exactly
/// `pivot_count` nonzero leading columns.
inline EchelonResult column_echelon_with_transforms(const Matrix& m, const Tolerance& tol = {},
                                                    double ref_scale = 0.0) {
  EchelonResult t = row_echelon_with_transforms(m.transpose(), tol, ref_scale);
  return EchelonResult{t.reduced.transpose(), t.right.transpose(), t.left.transpose(),
                       t.pivot_count};
}

/// left * M * right == [I_k 0; 0 0] with both transforms nonsingular.
struct RankNormalForm {
  Matrix left;
  Matrix right;
  Index rank = 0;
};

inline RankNormalForm rank_normal_form(const Matrix& m, const Tolerance& tol = {},
                                       double ref_scale = 0.0) {
  EchelonResult e = row_echelon_with_transforms(m, tol, ref_scale);
  const Index k = e.pivot_count;
  const Index cols = m.cols();
  Matrix fix = Matrix::Identity(cols, cols);
  if (k > 0) {
    const Matrix u11 = e.reduced.topLeftCorner(k, k);
    const Matrix u12 = e.reduced.topRightCorner(k, cols - k);
    const Matrix u11_inv =
        u11.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    fix.topLeftCorner(k, k) = u11_inv;
    fix.topRightCorner(k, cols - k) = -u11_inv * u12;
  }
  return RankNormalForm{e.left, e.right * fix, k};
}

/// Permutation matrix P with (P * M).row(i) == M.row(order[i]).
inline Matrix row_permutation(const std::vector<Index>& order) {
  const auto n = static_cast<Index>(order.size());
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    p(i, order[static_cast<std::size_t>(i)]) = 1.0;
  }
  return p;
}

}  // namespace rankred
