#pragma once

// Game-level rank reduction.
//
//   1. gamma*: pick a positive pencil eigenvalue of (A, B) with the largest
//      rank drop; scaling B by it is a positive affine transformation.
//   2. Wedderburn shifts on C = A + gamma* B: subtract 1_m u^T from A and/or
//      v 1_n^T from B. Each shift is itself a Wedderburn step because
//      C x1 = 1_m (row shift) or y2^T C2 = 1_n^T (column shift).
//
// Every certificate records gamma*, u_hat and v_hat so the reduced game can
// be replayed from the input without trusting the pipeline.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "rankred/game.hpp"
#include "rankred/matrix_core.hpp"
#include "rankred/pencil.hpp"
#include "rankred/wedderburn.hpp"

namespace rankred {

enum class ReductionPath { PencilOnly, OneStepRow, OneStepColumn, TwoStep, None };

inline const char* to_string(ReductionPath p) {
  switch (p) {
    case ReductionPath::PencilOnly: return "PencilOnly";
    case ReductionPath::OneStepRow: return "OneStepRow";
    case ReductionPath::OneStepColumn: return "OneStepColumn";
    case ReductionPath::TwoStep: return "TwoStep";
    case ReductionPath::None: return "None";
  }
  return "None";
}

inline ReductionPath path_from_string(const std::string& s) {
  if (s == "PencilOnly") return ReductionPath::PencilOnly;
  if (s == "OneStepRow") return ReductionPath::OneStepRow;
  if (s == "OneStepColumn") return ReductionPath::OneStepColumn;
  if (s == "TwoStep") return ReductionPath::TwoStep;
  if (s == "None") return ReductionPath::None;
  throw std::invalid_argument("unknown reduction path '" + s + "'");
}

/// Thrown by reduce() when the input already has rank 0.
class AlreadyZeroSum : public std::invalid_argument {
 public:
  AlreadyZeroSum() : std::invalid_argument("already zero-sum: rank(A + B) is 0") {}
};

struct ReductionCertificate {
  double gamma_star = 1.0;
  std::optional<Vector> u_hat;  // length n; A_hat = A - 1_m u_hat^T
  std::optional<Vector> v_hat;  // length m; B_hat = gamma* B - v_hat 1_n^T
  BimatrixGame reduced;
  Index rank_before = 0;
  Index rank_after = 0;
  ReductionPath path = ReductionPath::None;
  bool transposed = false;
  std::optional<PencilSpectrum> spectrum;
};

/// Recomputes the reduced game from the input and the recorded shifts.
inline BimatrixGame replay(const BimatrixGame& input, const ReductionCertificate& cert) {
  Matrix a = input.a();
  Matrix b = cert.gamma_star * input.b();
  if (cert.u_hat) {
    if (cert.u_hat->size() != input.n()) {
      throw std::invalid_argument("replay: u_hat length does not match n");
    }
    a -= ones(input.m()) * cert.u_hat->transpose();
  }
  if (cert.v_hat) {
    if (cert.v_hat->size() != input.m()) {
      throw std::invalid_argument("replay: v_hat length does not match m");
    }
    b -= *cert.v_hat * ones(input.n()).transpose();
  }
  return BimatrixGame(std::move(a), std::move(b));
}

struct GammaSelection {
  double gamma = 1.0;
  PencilSpectrum spectrum;
  bool fired = false;  // true when gamma != 1 strictly lowers the rank
};

/// Chooses gamma* among the positive real pencil eigenvalues of maximal
/// multiplicity (ties: closest to 1, then smallest). Falls back to 1 unless
/// m(gamma*) > m(1) and the direct rank really drops.
inline GammaSelection find_gamma_star(const BimatrixGame& g, const Tolerance& tol = {}) {
  GammaSelection sel;
  sel.spectrum = twcf_spectrum(g.a(), g.b(), tol);
  const auto positive = positive_real_spectrum(sel.spectrum, tol);
  if (positive.empty()) {
    return sel;
  }
  const RealEigenvalue* best = &positive.front();
  for (const auto& e : positive) {
    if (e.multiplicity > best->multiplicity) {
      best = &e;
    } else if (e.multiplicity == best->multiplicity) {
      const double d_e = std::abs(e.value - 1.0);
      const double d_b = std::abs(best->value - 1.0);
      if (d_e < d_b || (d_e == d_b && e.value < best->value)) {
        best = &e;
      }
    }
  }
  const Index m_one = multiplicity_at(sel.spectrum, Complex{1.0, 0.0}, tol);
  if (best->multiplicity <= m_one) {
    return sel;
  }
  const Index rank_one = direct_pencil_rank(g.a(), g.b(), Complex{1.0, 0.0}, tol);
  const Index rank_gamma = direct_pencil_rank(g.a(), g.b(), Complex{best->value, 0.0}, tol);
  if (rank_gamma < rank_one) {
    sel.gamma = best->value;
    sel.fired = true;
  } else {
    sel.spectrum.warnings.push_back("gamma* candidate " + std::to_string(best->value) +
                                    " rejected: no direct rank drop");
  }
  return sel;
}

namespace detail {

struct Shift {
  std::optional<Vector> u;  // row-player shift, length n
  std::optional<Vector> v;  // column-player shift, length m
};

constexpr std::uint64_t kProbeSeed = 0x5eedf00dULL;

// y1 for a fixed x1 with C x1 = 1_m: any coordinate vector on a nonzero row
// gives w1 = 1. The random fallback only triggers if that pivot is rejected.
inline std::optional<Vector> left_probe_for(const Matrix& c, const Vector& x1,
                                            const Tolerance& tol) {
  Vector y1 = default_probes(c, tol).y;
  if (pivot_is_valid(c, x1, y1, y1.dot(c * x1), tol)) {
    return y1;
  }
  try {
    y1 = random_left_probe(c, kProbeSeed, tol);
  } catch (const InvalidProbe&) {
    return std::nullopt;
  }
  if (pivot_is_valid(c, x1, y1, y1.dot(c * x1), tol)) {
    return y1;
  }
  return std::nullopt;
}

// 1_m in colspan(C): returns u with rank(C - 1_m u^T) = rank(C) - 1.
// `ref` is the payoff magnitude C was formed from.
inline std::optional<Vector> row_shift(const Matrix& c, const Tolerance& tol, double ref) {
  const Index k = rank(c, tol, ref);
  if (k < 1) {
    return std::nullopt;
  }
  const auto x1 = solve(c, ones(c.rows()), tol);
  if (!x1) {
    return std::nullopt;
  }
  const auto y1 = left_probe_for(c, *x1, tol);
  if (!y1) {
    return std::nullopt;
  }
  const double w1 = y1->dot(c * *x1);
  Vector u = c.transpose() * *y1 / w1;
  const Matrix c2 = c - ones(c.rows()) * u.transpose();
  if (rank(c2, tol, ref) != k - 1) {
    return std::nullopt;
  }
  return u;
}

// Two chained steps: first x1 with C x1 = 1_m and 1_n^T x1 = 0, then y2 with
// y2^T C2 = 1_n^T. The second step only exists because x1 is orthogonal to 1_n.
inline std::optional<Shift> two_step_shift(const Matrix& c, const Tolerance& tol, double ref) {
  const Index m = c.rows();
  const Index n = c.cols();
  const Index k = rank(c, tol, ref);
  if (k < 2) {
    return std::nullopt;
  }
  if (!in_column_span(c.transpose(), ones(n), tol)) {
    return std::nullopt;
  }
  Matrix bordered = Matrix::Zero(m + 1, n + 1);
  bordered.topLeftCorner(m, n) = c;
  bordered.topRightCorner(m, 1) = ones(m);
  bordered.bottomLeftCorner(1, n) = ones(n).transpose();
  if (rank(bordered, tol, ref) != k) {
    return std::nullopt;
  }
  Matrix stacked(m + 1, n);
  stacked << c, ones(n).transpose();
  Vector rhs = Vector::Zero(m + 1);
  rhs.head(m).setOnes();
  const auto x1 = solve(stacked, rhs, tol);
  if (!x1) {
    return std::nullopt;
  }
  const auto y1 = left_probe_for(c, *x1, tol);
  if (!y1) {
    return std::nullopt;
  }
  const double w1 = y1->dot(c * *x1);
  Vector u = c.transpose() * *y1 / w1;
  const Matrix c2 = c - ones(m) * u.transpose();

  const auto y2 = solve(c2.transpose(), ones(n), tol);
  if (!y2) {
    return std::nullopt;
  }
  const auto probe = c2.isZero(0.0) ? std::nullopt : std::optional<ProbePair>(default_probes(c2, tol));
  if (!probe) {
    return std::nullopt;
  }
  const Vector& x2 = probe->x;
  const double w2 = y2->dot(c2 * x2);
  if (!pivot_is_valid(c2, x2, *y2, w2, tol)) {
    return std::nullopt;
  }
  Vector v = c2 * x2 / w2;
  const Matrix c3 = c2 - v * ones(n).transpose();
  if (rank(c3, tol, ref) != k - 2) {
    return std::nullopt;
  }
  return Shift{std::move(u), std::move(v)};
}

inline ReductionCertificate make_certificate(const BimatrixGame& input, double gamma,
                                             std::optional<Vector> u, std::optional<Vector> v,
                                             ReductionPath path, Index rank_before,
                                             const Tolerance& tol) {
  ReductionCertificate cert{gamma, std::move(u), std::move(v), input, rank_before, 0, path,
                            false, std::nullopt};
  cert.reduced = replay(input, cert);
  cert.rank_after = game_rank(cert.reduced, tol);
  return cert;
}

}  // namespace detail

/// Row shift: requires 1_m in colspan(C). A_hat = A - 1_m u^T, B unchanged.
inline std::optional<ReductionCertificate> reduce_one_step_row(const BimatrixGame& g,
                                                               const Tolerance& tol = {}) {
  const Matrix c = g.sum();
  auto u = detail::row_shift(c, tol, payoff_scale(g));
  if (!u) {
    return std::nullopt;
  }
  return detail::make_certificate(g, 1.0, std::move(u), std::nullopt, ReductionPath::OneStepRow,
                                  game_rank(g, tol), tol);
}

/// Column shift: requires 1_n in colspan(C^T). B_hat = B - v 1_n^T, A unchanged.
inline std::optional<ReductionCertificate> reduce_one_step_column(const BimatrixGame& g,
                                                                  const Tolerance& tol = {}) {
  const Matrix c = g.sum();
  auto v = detail::row_shift(c.transpose(), tol, payoff_scale(g));
  if (!v) {
    return std::nullopt;
  }
  return detail::make_certificate(g, 1.0, std::nullopt, std::move(v),
                                  ReductionPath::OneStepColumn, game_rank(g, tol), tol);
}

/// Both shifts; lowers the rank by exactly 2 when the bordered-rank test passes.
inline std::optional<ReductionCertificate> reduce_two_step(const BimatrixGame& g,
                                                           const Tolerance& tol = {}) {
  const Matrix c = g.sum();
  auto shift = detail::two_step_shift(c, tol, payoff_scale(g));
  if (!shift) {
    return std::nullopt;
  }
  return detail::make_certificate(g, 1.0, std::move(shift->u), std::move(shift->v),
                                  ReductionPath::TwoStep, game_rank(g, tol), tol);
}

/// Full pipeline: gamma*, then two-step, then row / column one-step.
/// Inputs with m > n run the Wedderburn part on the player-swapped game and
/// the shifts are mapped back, so the certificate is always in the input frame.
inline ReductionCertificate reduce(const BimatrixGame& g, const Tolerance& tol = {}) {
  tol.validate();
  const Index rank_before = game_rank(g, tol);
  if (rank_before == 0) {
    throw AlreadyZeroSum();
  }
  GammaSelection sel = find_gamma_star(g, tol);
  const double gamma = sel.gamma;
  const Matrix c_bar = g.a() + gamma * g.b();
  const double ref = std::max(g.a().norm(), gamma * g.b().norm());
  const bool transposed = g.m() > g.n();
  const Matrix work = transposed ? Matrix(c_bar.transpose()) : c_bar;

  std::optional<Vector> u;
  std::optional<Vector> v;
  ReductionPath path = sel.fired ? ReductionPath::PencilOnly : ReductionPath::None;

  if (auto two = detail::two_step_shift(work, tol, ref)) {
    u = std::move(two->u);
    v = std::move(two->v);
    path = ReductionPath::TwoStep;
  } else if (auto row = detail::row_shift(work, tol, ref)) {
    u = std::move(row);
    path = ReductionPath::OneStepRow;
  } else if (auto col = detail::row_shift(work.transpose(), tol, ref)) {
    v = std::move(col);
    path = ReductionPath::OneStepColumn;
  }
  if (transposed) {
    // Swapped frame: its row player is our column player.
    std::swap(u, v);
    if (path == ReductionPath::OneStepRow) {
      path = ReductionPath::OneStepColumn;
    } else if (path == ReductionPath::OneStepColumn) {
      path = ReductionPath::OneStepRow;
    }
  }
  ReductionCertificate cert =
      detail::make_certificate(g, gamma, std::move(u), std::move(v), path, rank_before, tol);
  cert.transposed = transposed;
  cert.spectrum = std::move(sel.spectrum);
  return cert;
}

}  // namespace rankred
