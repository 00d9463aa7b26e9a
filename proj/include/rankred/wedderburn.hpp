#pragma once

// Wedderburn rank-one reduction:  C2 = C - w^{-1} (C x)(y^T C),  w = y^T C x.
//
// For any pair with w != 0, rank(C2) = rank(C) - 1: null(C) stays inside
// null(C2) and x joins it.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankred/matrix_core.hpp"

namespace rankred {

/// Raised when a probe pair gives a (numerically) zero pivot w.
class InvalidProbe : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RankOneUpdate {
  Vector x;
  Vector y;
  double w = 0.0;
  Matrix W;  // w^{-1} C x y^T C
};

struct DecompositionTrail {
  std::vector<RankOneUpdate> updates;
  Matrix residual;
};

struct ProbePair {
  Vector x;
  Vector y;
};

/// Probe strategy used by the rank-reducing process.
using ProbeStrategy = std::function<ProbePair(const Matrix&, const Tolerance&)>;

/// Pivot acceptance: |w| > rank_tol * ||C||_F * ||x|| * ||y||.
inline bool pivot_is_valid(const Matrix& c, const Vector& x, const Vector& y, double w,
                           const Tolerance& tol) {
  const double scale = c.norm() * x.norm() * y.norm();
  return std::isfinite(w) && std::abs(w) > tol.rank_tol * scale && w != 0.0;
}

inline std::pair<Matrix, RankOneUpdate> wedderburn_step(const Matrix& c, const Vector& x,
                                                        const Vector& y, const Tolerance& tol = {}) {
  if (x.size() != c.cols() || y.size() != c.rows()) {
    throw std::invalid_argument("wedderburn_step: probe lengths do not match the matrix");
  }
  const Vector cx = c * x;
  const Eigen::RowVectorXd ytc = y.transpose() * c;
  const double w = ytc.dot(x);
  if (!pivot_is_valid(c, x, y, w, tol)) {
    throw InvalidProbe("wedderburn_step: pivot w = y^T C x is zero within tolerance");
  }
  RankOneUpdate upd{x, y, w, (cx * ytc) / w};
  Matrix c2 = c - upd.W;
  return {std::move(c2), std::move(upd)};
}

/// Coordinate probes through the largest-magnitude entry (ties: lowest row,
/// then lowest column). Mx is that entry's column, y^T M its row, and both
/// coordinate vectors have unit coordinate sum.
inline ProbePair default_probes(const Matrix& m, const Tolerance& /*tol*/ = {}) {
  Index bi = 0;
  Index bj = 0;
  double best = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > best) {
        best = std::abs(m(i, j));
        bi = i;
        bj = j;
      }
    }
  }
  if (best == 0.0) {
    throw std::invalid_argument("default_probes: matrix is identically zero");
  }
  return ProbePair{Vector::Unit(m.cols(), bj), Vector::Unit(m.rows(), bi)};
}

/// Random left probe y with y^T M != 0 and 1^T y != 0, drawn from a seeded
/// generator. Fallback for when one side of the pair is already fixed.
inline Vector random_left_probe(const Matrix& m, std::uint64_t seed, const Tolerance& tol = {}) {
  if (m.isZero(0.0)) {
    throw std::invalid_argument("random_left_probe: matrix is identically zero");
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double scale = m.norm();
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vector y(m.rows());
    for (Index i = 0; i < y.size(); ++i) y(i) = dist(gen);
    if (std::abs(y.sum()) > tol.rank_tol * y.norm() &&
        (m.transpose() * y).norm() > tol.rank_tol * scale * y.norm()) {
      return y;
    }
  }
  throw InvalidProbe("random_left_probe: no admissible probe found");
}

/// Full rank-reducing process: exactly rank(C) steps, C = sum W_k + residual.
inline DecompositionTrail rank_reducing_process(const Matrix& c, const ProbeStrategy& strategy,
                                                const Tolerance& tol = {}) {
  if (c.isZero(0.0)) {
    throw std::invalid_argument("rank_reducing_process: matrix is identically zero");
  }
  const Index r = rank(c, tol);
  DecompositionTrail trail;
  Matrix current = c;
  for (Index k = 0; k < r; ++k) {
    const ProbePair probes = strategy(current, tol);
    auto [next, upd] = wedderburn_step(current, probes.x, probes.y, tol);
    trail.updates.push_back(std::move(upd));
    current = std::move(next);
  }
  trail.residual = std::move(current);
  return trail;
}

inline DecompositionTrail rank_reducing_process(const Matrix& c, const Tolerance& tol = {}) {
  return rank_reducing_process(
      c, [](const Matrix& m, const Tolerance& t) { return default_probes(m, t); }, tol);
}

/// z stays in the row space after one step with right probe x1 iff
/// z is in colspan(C^T) and z is orthogonal to x1.
inline bool span_preserved(const Matrix& c, const Vector& x1, const Vector& z,
                           const Tolerance& tol = {}) {
  if (x1.size() != c.cols() || z.size() != c.cols()) {
    throw std::invalid_argument("span_preserved: vector lengths must equal the column count");
  }
  const bool orthogonal = std::abs(z.dot(x1)) <= tol.residual_tol * z.norm() * x1.norm();
  return orthogonal && in_column_span(c.transpose(), z, tol);
}

}  // namespace rankred
