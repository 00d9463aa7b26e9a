#pragma once

// Support enumeration for small bimatrix games. This is a verification
// oracle: exponential in the game size, capped at 5x5 by default.

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankred/game.hpp"
#include "rankred/matrix_core.hpp"

namespace rankred {

class SizeCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

class DegenerateGame : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Index kDefaultOracleCap = 5;
inline constexpr double kProfileMatchTol = 1e-7;
inline constexpr double kBestResponseTol = 1e-7;

struct MixedProfile {
  Vector p;
  Vector q;
  double payoff1 = 0.0;
  double payoff2 = 0.0;
};

struct EquilibriumSet {
  std::vector<MixedProfile> profiles;
  bool degenerate = false;
};

inline bool same_profile(const MixedProfile& x, const MixedProfile& y,
                         double tol = kProfileMatchTol) {
  return x.p.size() == y.p.size() && x.q.size() == y.q.size() &&
         (x.p - y.p).cwiseAbs().maxCoeff() <= tol && (x.q - y.q).cwiseAbs().maxCoeff() <= tol;
}

/// No pure deviation improves either player's payoff by more than tol * scale.
inline bool is_nash(const BimatrixGame& g, const Vector& p, const Vector& q,
                    double tol = kBestResponseTol) {
  const double scale_a = std::max(1.0, g.a().cwiseAbs().maxCoeff());
  const double scale_b = std::max(1.0, g.b().cwiseAbs().maxCoeff());
  const Vector aq = g.a() * q;
  const Vector pb = g.b().transpose() * p;
  return aq.maxCoeff() - p.dot(aq) <= tol * scale_a && pb.maxCoeff() - q.dot(pb) <= tol * scale_b;
}

namespace detail {

inline std::vector<std::vector<Index>> subsets_of_size(Index n, Index k) {
  std::vector<std::vector<Index>> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<Index>(__builtin_popcount(mask)) != k) continue;
    std::vector<Index> s;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(i);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Solves  M[rows, cols] x - value * 1 = 0,  1^T x = 1  for (x, value).
// Returns false when the indifference system is singular.
inline bool indifference(const Matrix& m, const std::vector<Index>& rows,
                         const std::vector<Index>& cols, Vector& x, double& value) {
  const auto k = static_cast<Index>(rows.size());
  Matrix sys = Matrix::Zero(k + 1, k + 1);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      sys(i, j) = m(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    }
    sys(i, k) = -1.0;
    sys(k, i) = 1.0;
  }
  Eigen::FullPivLU<Matrix> lu(sys);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    return false;
  }
  Vector rhs = Vector::Zero(k + 1);
  rhs(k) = 1.0;
  const Vector sol = lu.solve(rhs);
  x = sol.head(k);
  value = sol(k);
  return true;
}

}  // namespace detail

/// All equilibria with equal-size supports. `degenerate` is set when a
/// support system is singular, a support probability vanishes, or a pure
/// strategy outside the support is also a best response.
inline EquilibriumSet enumerate_equilibria(const BimatrixGame& g, Index cap = kDefaultOracleCap) {
  const Index m = g.m();
  const Index n = g.n();
  if (m > cap || n > cap) {
    throw SizeCapExceeded("support enumeration is capped at " + std::to_string(cap) + "x" +
                          std::to_string(cap) + "; game is " + std::to_string(m) + "x" +
                          std::to_string(n));
  }
  const double tie_tol_a = 1e-9 * std::max(1.0, g.a().cwiseAbs().maxCoeff());
  const double tie_tol_b = 1e-9 * std::max(1.0, g.b().cwiseAbs().maxCoeff());
  const Matrix bt = g.b().transpose();

  EquilibriumSet result;
  for (Index k = 1; k <= std::min(m, n); ++k) {
    const auto row_sets = detail::subsets_of_size(m, k);
    const auto col_sets = detail::subsets_of_size(n, k);
    for (const auto& rows : row_sets) {
      for (const auto& cols : col_sets) {
        Vector qs;
        Vector ps;
        double va = 0.0;
        double vb = 0.0;
        if (!detail::indifference(g.a(), rows, cols, qs, va) ||
            !detail::indifference(bt, cols, rows, ps, vb)) {
          result.degenerate = true;
          continue;
        }
        if (qs.minCoeff() < -1e-12 || ps.minCoeff() < -1e-12) {
          continue;
        }
        Vector p = Vector::Zero(m);
        Vector q = Vector::Zero(n);
        for (Index i = 0; i < k; ++i) {
          p(rows[static_cast<std::size_t>(i)]) = std::max(0.0, ps(i));
          q(cols[static_cast<std::size_t>(i)]) = std::max(0.0, qs(i));
        }
        p /= p.sum();
        q /= q.sum();
        if (!is_nash(g, p, q)) {
          continue;
        }
        if (qs.minCoeff() < 1e-9 || ps.minCoeff() < 1e-9) {
          result.degenerate = true;
        }
        const Vector aq = g.a() * q;
        const Vector pb = bt * p;
        for (Index i = 0; i < m; ++i) {
          if (p(i) == 0.0 && aq(i) >= aq.maxCoeff() - tie_tol_a) result.degenerate = true;
        }
        for (Index j = 0; j < n; ++j) {
          if (q(j) == 0.0 && pb(j) >= pb.maxCoeff() - tie_tol_b) result.degenerate = true;
        }
        MixedProfile prof{p, q, p.dot(aq), p.dot(g.b() * q)};
        const bool seen = std::any_of(result.profiles.begin(), result.profiles.end(),
                                      [&](const MixedProfile& o) { return same_profile(o, prof); });
        if (!seen) {
          result.profiles.push_back(std::move(prof));
        }
      }
    }
  }
  return result;
}

/// Strategic equivalence: identical equilibrium sets, matched greedily
/// within 1e-7 in probability space.
inline bool equivalent(const BimatrixGame& g1, const BimatrixGame& g2,
                       Index cap = kDefaultOracleCap) {
  if (g1.m() != g2.m() || g1.n() != g2.n()) {
    throw std::invalid_argument("equivalent: games differ in shape");
  }
  const EquilibriumSet e1 = enumerate_equilibria(g1, cap);
  const EquilibriumSet e2 = enumerate_equilibria(g2, cap);
  if (e1.degenerate || e2.degenerate) {
    throw DegenerateGame("equivalent: comparison is unreliable for degenerate games");
  }
  if (e1.profiles.size() != e2.profiles.size()) {
    return false;
  }
  std::vector<bool> used(e2.profiles.size(), false);
  for (const auto& x : e1.profiles) {
    bool matched = false;
    for (std::size_t j = 0; j < e2.profiles.size(); ++j) {
      if (!used[j] && same_profile(x, e2.profiles[j])) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) {
      return false;
    }
  }
  return true;
}

}  // namespace rankred
