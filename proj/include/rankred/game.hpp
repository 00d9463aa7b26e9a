#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "rankred/matrix_core.hpp"

namespace rankred {

/// Two-player game (m, n, A, B): A pays the row player, B the column player.
class BimatrixGame {
 public:
  BimatrixGame(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() == 0 || a_.cols() == 0) {
      throw std::invalid_argument("game must have at least one strategy per player");
    }
    if (a_.rows() != b_.rows() || a_.cols() != b_.cols()) {
      throw std::invalid_argument("payoff matrices differ in shape: A is " +
                                  std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()) +
                                  ", B is " + std::to_string(b_.rows()) + "x" +
                                  std::to_string(b_.cols()));
    }
    require_finite(a_, "payoff matrix A");
    require_finite(b_, "payoff matrix B");
  }

  [[nodiscard]] const Matrix& a() const { return a_; }
  [[nodiscard]] const Matrix& b() const { return b_; }
  [[nodiscard]] Index m() const { return a_.rows(); }
  [[nodiscard]] Index n() const { return a_.cols(); }

  /// C = A + B; its rank is the rank of the game.
  [[nodiscard]] Matrix sum() const { return a_ + b_; }

  /// Same game with the players' roles exchanged: (B^T, A^T).
  [[nodiscard]] BimatrixGame swapped() const {
    return BimatrixGame(b_.transpose(), a_.transpose());
  }

 private:
  Matrix a_;
  Matrix b_;
};

/// Magnitude of the payoffs, the reference for rank decisions on A + B.
inline double payoff_scale(const BimatrixGame& g) {
  return std::max(g.a().norm(), g.b().norm());
}

inline Index game_rank(const BimatrixGame& g, const Tolerance& tol = {}) {
  return rank(g.sum(), tol, payoff_scale(g));
}

/// Positive affine transformation
///   A' = alpha1 A + beta1 1_m u^T,   B' = alpha2 B + beta2 v 1_n^T.
struct PATParams {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  Vector u;  // length n
  Vector v;  // length m
};

inline BimatrixGame apply_pat(const BimatrixGame& g, const PATParams& p) {
  if (!(p.alpha1 > 0.0) || !(p.alpha2 > 0.0)) {
    throw std::invalid_argument("apply_pat: alpha1 and alpha2 must be strictly positive");
  }
  const Vector u = p.u.size() == 0 ? Vector::Zero(g.n()) : p.u;
  const Vector v = p.v.size() == 0 ? Vector::Zero(g.m()) : p.v;
  if (u.size() != g.n() || v.size() != g.m()) {
    throw std::invalid_argument("apply_pat: u must have length n and v length m");
  }
  Matrix a = p.alpha1 * g.a() + p.beta1 * ones(g.m()) * u.transpose();
  Matrix b = p.alpha2 * g.b() + p.beta2 * v * ones(g.n()).transpose();
  return BimatrixGame(std::move(a), std::move(b));
}

}  // namespace rankred
