#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace rankred {

/// Numerical thresholds shared by every rank, eigenvalue and solve decision.
///
/// `rank_tol` is relative: a singular value (or elimination pivot) counts
/// toward the rank only if it exceeds `rank_tol` times the largest one. The
/// effective threshold never drops below max(rows, cols) * machine epsilon.
///
/// `eig_tol` is the clustering radius for pencil eigenvalues and the
/// realness / positivity margin, always scaled by (1 + |lambda|).
///
/// `residual_tol` accepts a linear solve when ||Mx - b|| <= residual_tol * (1 + ||b||).
struct Tolerance {
  double rank_tol = 1e-9;
  double eig_tol = 1e-6;
  double residual_tol = 1e-8;

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v >= 0.0 && v < 1.0)) {
        throw std::invalid_argument(std::string("tolerance ") + name + " must lie in [0, 1)");
      }
    };
    check(rank_tol, "rank_tol");
    check(eig_tol, "eig_tol");
    check(residual_tol, "residual_tol");
  }

  [[nodiscard]] double effective_rank_tol(std::size_t rows, std::size_t cols) const {
    const double floor = static_cast<double>(std::max<std::size_t>({rows, cols, 1})) *
                         std::numeric_limits<double>::epsilon();
    return std::max(rank_tol, floor);
  }

  /// Same tolerance with the rank threshold scaled, used for re-checks.
  [[nodiscard]] Tolerance tightened(double factor) const {
    Tolerance t = *this;
    t.rank_tol *= factor;
    t.residual_tol *= factor;
    return t;
  }
};

}  // namespace rankred
