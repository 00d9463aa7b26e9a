#pragma once

// Statistical checks of rank reduction on random games.
//
// Square full-rank games: the two-step reduction needs 1^T C^{-1} 1 = 0, a
// measure-zero event, so almost every such game reduces by exactly one.
// Rectangular games built as C = 1 u^T + v 1^T + (rank k-2 part) satisfy both
// span conditions and almost always reduce by two.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankred/game.hpp"
#include "rankred/matrix_core.hpp"
#include "rankred/reduction.hpp"

namespace rankred {

enum class ExperimentKind { SquareLimit, RectTwoStep };

inline const char* to_string(ExperimentKind k) {
  return k == ExperimentKind::SquareLimit ? "SquareLimit" : "RectTwoStep";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "SquareLimit") return ExperimentKind::SquareLimit;
  if (s == "RectTwoStep") return ExperimentKind::RectTwoStep;
  throw std::invalid_argument("unknown experiment kind '" + s +
                              "' (expected SquareLimit or RectTwoStep)");
}

struct RectSize {
  Index m = 0;
  Index n = 0;
  Index k = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SquareLimit;
  int trials = 1;
  std::vector<Index> square_sizes{2, 3, 4, 5, 6};
  std::vector<RectSize> rect_sizes{{4, 6, 3}, {4, 6, 4}, {5, 8, 5}};
  std::uint64_t seed = 0;
  bool allow_small = false;  // admit 2 < m for rectangular games
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::SquareLimit;
  int trials = 0;
  int successes = 0;
  std::vector<std::uint64_t> failures;   // trial seeds
  std::vector<std::uint64_t> rechecked;  // passed only at the tighter tolerance
  std::uint64_t seed = 0;
};

/// Per-trial seed derivation (splitmix64).
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}

  double next() { return dist_(gen_); }

  Matrix matrix(Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) out(i, j) = next();
    }
    return out;
  }

  Vector vector(Index n) {
    Vector out(n);
    for (Index i = 0; i < n; ++i) out(i) = next();
    return out;
  }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> dist_{-1.0, 1.0};
};

}  // namespace detail

/// Square game with i.i.d. uniform [-1, 1] payoffs, resampled until rank(A + B) = m.
inline BimatrixGame sample_square_game(Index m, std::uint64_t seed, const Tolerance& tol = {}) {
  if (m < 2) {
    throw std::invalid_argument("sample_square_game: m must be at least 2");
  }
  detail::UniformSource src(seed);
  while (true) {
    Matrix a = src.matrix(m, m);
    Matrix b = src.matrix(m, m);
    if (rank(Matrix(a + b), tol) == m) {
      return BimatrixGame(std::move(a), std::move(b));
    }
  }
}

/// True iff 1^T C^{-1} 1 != 0, i.e. one-step reduction only.
inline bool check_square_limit(const BimatrixGame& g, const Tolerance& tol = {}) {
  if (g.m() != g.n()) {
    throw std::invalid_argument("check_square_limit: game must be square");
  }
  const Matrix c = g.sum();
  if (rank(c, tol) != g.m()) {
    throw std::invalid_argument("check_square_limit: A + B is singular");
  }
  const auto x = solve(c, ones(g.m()), tol);
  if (!x) {
    throw NumericError("check_square_limit: solve failed on a nonsingular matrix");
  }
  return std::abs(x->sum()) > tol.residual_tol * x->lpNorm<1>();
}

/// Full-rank square game whose cofactors of C = A + B sum to zero.
inline BimatrixGame plant_cofactor_witness(Index m, std::uint64_t seed, const Tolerance& tol = {}) {
  if (m < 2) {
    throw std::invalid_argument("plant_cofactor_witness: m must be at least 2");
  }
  detail::UniformSource src(seed);
  while (true) {
    Vector x = src.vector(m);
    x.array() -= x.mean();
    const Matrix c0 = src.matrix(m, m);
    // Rank-one correction so that C x = 1 while 1^T x = 0.
    const Matrix c = c0 + (ones(m) - c0 * x) * x.transpose() / x.squaredNorm();
    if (rank(c, tol) != m) continue;
    Matrix a = src.matrix(m, m);
    Matrix b = c - a;
    return BimatrixGame(std::move(a), std::move(b));
  }
}

/// C = 1_m u^T + v 1_n^T + sum_{i<k-2} r_i c_i^T with random factors, A random, B = C - A.
inline BimatrixGame sample_structured_rect_game(Index m, Index n, Index k, std::uint64_t seed,
                                                bool allow_small = false) {
  const Index min_m = allow_small ? 3 : 4;
  if (m < min_m || m >= n) {
    throw std::invalid_argument("sample_structured_rect_game: need " +
                                std::string(allow_small ? "2" : "3") + " < m < n");
  }
  if (k < 2 || k > m) {
    throw std::invalid_argument("sample_structured_rect_game: need 2 <= k <= m");
  }
  detail::UniformSource src(seed);
  const Vector u = src.vector(n);
  const Vector v = src.vector(m);
  Matrix c = ones(m) * u.transpose() + v * ones(n).transpose();
  for (Index i = 0; i + 2 < k; ++i) {
    const Vector r = src.vector(m);
    const Vector cc = src.vector(n);
    c += r * cc.transpose();
  }
  Matrix a = src.matrix(m, n);
  Matrix b = c - a;
  return BimatrixGame(std::move(a), std::move(b));
}

struct PlantedGame {
  BimatrixGame base;
  PATParams params;
  double gamma = 1.0;  // alpha1 / alpha2, the planted pencil eigenvalue
  BimatrixGame game;
};

/// Base game of rank `base_rank` (0: B = -A, 1: B = -A + r c^T) pushed
/// through a PAT with alpha2 = alpha1 / gamma and random shifts u, v.
inline PlantedGame plant_pat_game(Index m, Index n, Index base_rank, double gamma,
                                  std::uint64_t seed) {
  if (m < 1 || n < 1) {
    throw std::invalid_argument("plant_pat_game: dimensions must be positive");
  }
  if (base_rank < 0 || base_rank > 1) {
    throw std::invalid_argument("plant_pat_game: base rank must be 0 or 1");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("plant_pat_game: gamma must be positive");
  }
  detail::UniformSource src(seed);
  Matrix a0 = src.matrix(m, n);
  Matrix b0 = -a0;
  if (base_rank == 1) {
    b0 += src.vector(m) * src.vector(n).transpose();
  }
  PATParams p;
  p.alpha1 = 1.0 + 0.5 * src.next();  // [0.5, 1.5]
  p.alpha2 = p.alpha1 / gamma;
  p.beta1 = 1.0;
  p.beta2 = 1.0;
  p.u = src.vector(n);
  p.v = src.vector(m);
  BimatrixGame base(std::move(a0), std::move(b0));
  BimatrixGame game = apply_pat(base, p);
  return PlantedGame{std::move(base), std::move(p), gamma, std::move(game)};
}

namespace detail {

inline bool replay_matches(const BimatrixGame& input, const ReductionCertificate& cert,
                           const Tolerance& tol) {
  const BimatrixGame again = replay(input, cert);
  const double scale = 1.0 + cert.reduced.a().cwiseAbs().maxCoeff() +
                       cert.reduced.b().cwiseAbs().maxCoeff();
  return (again.a() - cert.reduced.a()).cwiseAbs().maxCoeff() <= tol.residual_tol * scale &&
         (again.b() - cert.reduced.b()).cwiseAbs().maxCoeff() <= tol.residual_tol * scale &&
         game_rank(again, tol) == cert.rank_after && game_rank(input, tol) == cert.rank_before;
}

inline bool square_trial(Index m, std::uint64_t seed, const Tolerance& tol) {
  const BimatrixGame g = sample_square_game(m, seed, tol);
  if (!check_square_limit(g, tol)) return false;
  const ReductionCertificate cert = reduce(g, tol);
  return cert.rank_after == m - 1 && replay_matches(g, cert, tol);
}

inline bool rect_trial(const RectSize& s, std::uint64_t seed, bool allow_small,
                       const Tolerance& tol) {
  const BimatrixGame g = sample_structured_rect_game(s.m, s.n, s.k, seed, allow_small);
  const ReductionCertificate cert = reduce(g, tol);
  return cert.rank_after == s.k - 2 && replay_matches(g, cert, tol);
}

}  // namespace detail

/// Runs `trials` independent trials, cycling through the configured sizes.
/// A failed trial is re-examined at a 1000x tighter rank tolerance before it
/// counts as a failure.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Tolerance& tol = {}) {
  if (cfg.trials < 1) {
    throw std::invalid_argument("run_experiment: trials must be at least 1");
  }
  if (cfg.kind == ExperimentKind::SquareLimit && cfg.square_sizes.empty()) {
    throw std::invalid_argument("run_experiment: no square sizes given");
  }
  if (cfg.kind == ExperimentKind::RectTwoStep && cfg.rect_sizes.empty()) {
    throw std::invalid_argument("run_experiment: no rectangular sizes given");
  }
  ExperimentReport report;
  report.kind = cfg.kind;
  report.trials = cfg.trials;
  report.seed = cfg.seed;

  const Tolerance tight = tol.tightened(1e-3);
  for (int t = 0; t < cfg.trials; ++t) {
    const auto idx = static_cast<std::size_t>(t);
    const std::uint64_t s = trial_seed(cfg.seed, idx);
    auto run = [&](const Tolerance& use) {
      if (cfg.kind == ExperimentKind::SquareLimit) {
        return detail::square_trial(cfg.square_sizes[idx % cfg.square_sizes.size()], s, use);
      }
      return detail::rect_trial(cfg.rect_sizes[idx % cfg.rect_sizes.size()], s, cfg.allow_small,
                                use);
    };
    if (run(tol)) {
      ++report.successes;
    } else if (run(tight)) {
      ++report.successes;
      report.rechecked.push_back(s);
    } else {
      report.failures.push_back(s);
    }
  }
  return report;
}

}  // namespace rankred
