#include <gtest/gtest.h>

#include "rankred/equilibrium.hpp"
#include "rankred/genericlab.hpp"
#include "rankred/reduction.hpp"
#include "support.hpp"

using namespace rankred;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> xs) {
  std::vector<std::vector<double>> v;
  for (const auto& r : xs) v.emplace_back(r);
  return matrix_from_rows(v);
}

// Splits C into a random A and B = C - A.
BimatrixGame split(const Matrix& c, std::uint64_t seed) {
  rrtest::Rng rng(seed);
  Matrix a = rng.matrix(c.rows(), c.cols());
  return BimatrixGame(a, c - a);
}

double payoff_ref(const BimatrixGame& g) { return std::max(g.a().norm(), g.b().norm()); }

// Recompute the reduced game from the recorded shifts without the library.
::testing::AssertionResult replays(const BimatrixGame& in, const ReductionCertificate& c) {
  Matrix a = in.a();
  Matrix b = c.gamma_star * in.b();
  if (c.u_hat) a -= Matrix::Ones(in.m(), 1) * c.u_hat->transpose();
  if (c.v_hat) b -= *c.v_hat * Matrix::Ones(1, in.n());
  const double scale = 1.0 + rrtest::max_abs(c.reduced.a()) + rrtest::max_abs(c.reduced.b());
  const double err = std::max(rrtest::max_abs(a - c.reduced.a()), rrtest::max_abs(b - c.reduced.b()));
  if (err > 1e-8 * scale) return ::testing::AssertionFailure() << "replay error " << err;
  const Index before = rrtest::qr_rank(in.sum(), 1e-9, payoff_ref(in));
  const Index after = rrtest::qr_rank(Matrix(a + b), 1e-9, std::max(a.norm(), b.norm()));
  if (before != c.rank_before || after != c.rank_after) {
    return ::testing::AssertionFailure() << "ranks " << before << " -> " << after
                                         << ", certificate says " << c.rank_before << " -> "
                                         << c.rank_after;
  }
  return ::testing::AssertionSuccess();
}

::testing::AssertionResult path_accounting(const ReductionCertificate& c) {
  Index expected_drop = 0;
  switch (c.path) {
    case ReductionPath::TwoStep: expected_drop = 2; break;
    case ReductionPath::OneStepRow:
    case ReductionPath::OneStepColumn: expected_drop = 1; break;
    case ReductionPath::PencilOnly:
    case ReductionPath::None: expected_drop = 0; break;
  }
  if (c.path == ReductionPath::None && c.rank_after != c.rank_before) {
    return ::testing::AssertionFailure() << "path None changed the rank";
  }
  if (c.path != ReductionPath::None && c.rank_after >= c.rank_before) {
    return ::testing::AssertionFailure() << "path " << to_string(c.path) << " did not lower rank";
  }
  if (c.gamma_star == 1.0 && c.rank_after != c.rank_before - expected_drop) {
    return ::testing::AssertionFailure() << "path " << to_string(c.path) << " rank "
                                         << c.rank_before << " -> " << c.rank_after;
  }
  return ::testing::AssertionSuccess();
}

}  // namespace

TEST(Path, StringRoundTrip) {
  for (auto p : {ReductionPath::PencilOnly, ReductionPath::OneStepRow, ReductionPath::OneStepColumn,
                 ReductionPath::TwoStep, ReductionPath::None}) {
    EXPECT_EQ(path_from_string(to_string(p)), p);
  }
  EXPECT_THROW(path_from_string("Sideways"), std::invalid_argument);
}

TEST(GammaStar, Examples) {
  {
    const BimatrixGame g(Matrix::Identity(2, 2), -0.5 * Matrix::Identity(2, 2));
    const GammaSelection s = find_gamma_star(g);
    EXPECT_NEAR(s.gamma, 2.0, 1e-9);
    EXPECT_TRUE(s.fired);
    EXPECT_EQ(rrtest::qr_rank(Matrix(g.a() + s.gamma * g.b()), 1e-9, 2.0), 0);
  }
  {
    const GammaSelection s = find_gamma_star(BimatrixGame(Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
    EXPECT_EQ(s.gamma, 1.0);
    EXPECT_FALSE(s.fired);
  }
  {
    const Matrix a = rows({{1, -1}, {-1, 1}});
    const GammaSelection s = find_gamma_star(BimatrixGame(a, -a));
    EXPECT_EQ(s.gamma, 1.0);
    EXPECT_FALSE(s.fired);
  }
}

TEST(GammaStar, PrefersLargestMultiplicityThenClosestToOne) {
  // diag pencil with eigenvalues 3 (twice) and 0.9 (once).
  const Matrix a = rows({{-3, 0, 0}, {0, -3, 0}, {0, 0, -0.9}});
  const GammaSelection s = find_gamma_star(BimatrixGame(a, Matrix::Identity(3, 3)));
  EXPECT_NEAR(s.gamma, 3.0, 1e-9);
  const Matrix b = rows({{-3, 0, 0}, {0, -0.9, 0}, {0, 0, 2}});
  const GammaSelection t = find_gamma_star(BimatrixGame(b, Matrix::Identity(3, 3)));
  EXPECT_NEAR(t.gamma, 0.9, 1e-9);
}

TEST(OneStepRow, Examples) {
  const Matrix a = rows({{1, 2}, {3, 4}});
  const Matrix b = rows({{9, 8}, {7, 6}});
  const BimatrixGame g(a, b);
  const auto cert = reduce_one_step_row(g);
  ASSERT_TRUE(cert);
  EXPECT_EQ(cert->rank_before, 1);
  EXPECT_EQ(cert->rank_after, 0);
  EXPECT_LE(rrtest::max_abs(cert->reduced.sum()), 1e-12);
  EXPECT_TRUE(cert->reduced.b().isApprox(b));
  EXPECT_TRUE(replays(g, *cert));

  EXPECT_FALSE(reduce_one_step_row(split(rows({{1, 0}, {0, 0}}), 1)));

  rrtest::Rng rng(401);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = rng.integer(1, 5);
    const Index n = m + rng.integer(0, 3);
    const BimatrixGame full = split(rng.matrix(m, n), static_cast<std::uint64_t>(trial));
    const auto c = reduce_one_step_row(full);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->rank_after, m - 1);
  }
}

TEST(OneStepColumn, Examples) {
  const Vector r = (Vector(3) << 5, 6, 7).finished();
  EXPECT_FALSE(reduce_one_step_column(split(ones(2) * r.transpose(), 2)));

  const Vector col = (Vector(2) << 4, 5).finished();
  const BimatrixGame g = split(col * ones(3).transpose(), 3);
  const auto c = reduce_one_step_column(g);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->rank_after, 0);
  EXPECT_TRUE(c->reduced.a().isApprox(g.a()));
  EXPECT_FALSE(c->u_hat);
  EXPECT_TRUE(replays(g, *c));

  const auto id = reduce_one_step_column(split(Matrix::Identity(2, 2), 4));
  ASSERT_TRUE(id);
  EXPECT_EQ(id->rank_after, 1);
}

TEST(TwoStep, Examples) {
  const BimatrixGame g = split(rows({{5, 6, 7}, {6, 7, 8}}), 5);
  const auto c = reduce_two_step(g);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->rank_before, 2);
  EXPECT_EQ(c->rank_after, 0);
  EXPECT_LE(rrtest::max_abs(c->reduced.sum()), 1e-10);
  EXPECT_TRUE(replays(g, *c));

  EXPECT_FALSE(reduce_two_step(split(Matrix::Identity(2, 2), 6)));
  EXPECT_FALSE(reduce_two_step(split(ones(2) * ones(3).transpose(), 7)));
}

TEST(Reduce, AlreadyZeroSumRejected) {
  const Matrix a = rows({{1, -1}, {-1, 1}});
  EXPECT_THROW(reduce(BimatrixGame(a, -a)), AlreadyZeroSum);
}

TEST(Reduce, RejectsInvalidTolerance) {
  EXPECT_THROW(reduce(split(Matrix::Identity(2, 2), 1), Tolerance{2.0, 1e-6, 1e-8}),
               std::invalid_argument);
}

TEST(Reduce, PlantedZeroSumThroughPat) {
  // Zero-sum base, alpha1 = 1, alpha2 = 1/2, beta1 = 1, beta2 = 2: gamma = 2.
  rrtest::Rng rng(402);
  const Matrix a0 = rng.matrix(3, 5);
  PATParams p;
  p.alpha2 = 0.5;
  p.beta1 = 1.0;
  p.u = (Vector(5) << 1, 2, 3, 4, 5).finished();
  p.beta2 = 2.0;
  p.v = (Vector(3) << 4, 5, 6).finished();
  const BimatrixGame base(a0, -a0);
  const BimatrixGame g = apply_pat(base, p);
  const ReductionCertificate c = reduce(g);
  EXPECT_NEAR(c.gamma_star, 2.0, 1e-6 * 2.0);
  EXPECT_EQ(c.path, ReductionPath::TwoStep);
  EXPECT_EQ(c.rank_after, 0);
  EXPECT_TRUE(replays(g, c));
  EXPECT_TRUE(equivalent(g, c.reduced));
  EXPECT_TRUE(equivalent(base, c.reduced));
}

TEST(Reduce, TwoByThreeZeroSumBaseReachesRankOne) {
  // With m = 2 the planted value is not a rank-dropping eigenvalue, so only
  // the shift part of the PAT can be undone.
  rrtest::Rng rng(403);
  const Matrix a0 = rng.matrix(2, 3);
  PATParams p;
  p.alpha2 = 0.5;
  p.beta1 = 1.0;
  p.u = (Vector(3) << 1, 2, 3).finished();
  p.beta2 = 2.0;
  p.v = (Vector(2) << 4, 5).finished();
  const BimatrixGame g = apply_pat(BimatrixGame(a0, -a0), p);
  const ReductionCertificate c = reduce(g);
  EXPECT_EQ(c.rank_before, 2);
  EXPECT_EQ(c.rank_after, 1);
  EXPECT_TRUE(replays(g, c));
}

TEST(Reduce, TallGamesRunTransposed) {
  rrtest::Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.integer(2, 4);
    const Index m = n + rng.integer(1, 2);
    const BimatrixGame g(rng.matrix(m, n), rng.matrix(m, n));
    const ReductionCertificate c = reduce(g);
    EXPECT_TRUE(c.transposed);
    EXPECT_TRUE(replays(g, c));
    EXPECT_LT(c.rank_after, c.rank_before);
    if (c.u_hat) {
      EXPECT_EQ(c.u_hat->size(), n);
    }
    if (c.v_hat) {
      EXPECT_EQ(c.v_hat->size(), m);
    }
  }
}

TEST(Reduce, CertificatesReplayAndAccountOnRandomGames) {
  rrtest::Rng rng(405);
  for (int trial = 0; trial < 300; ++trial) {
    const Index m = rng.integer(1, 6);
    const Index n = rng.integer(1, 6);
    const Index k = rng.integer(1, std::min(m, n));
    const BimatrixGame g = split(rng.low_rank(m, n, k), static_cast<std::uint64_t>(trial));
    const ReductionCertificate c = reduce(g);
    EXPECT_TRUE(replays(g, c));
    EXPECT_TRUE(path_accounting(c));
    EXPECT_GT(c.gamma_star, 0.0);
    ASSERT_TRUE(c.spectrum);
  }
}

TEST(Reduce, FullRowRankAlwaysReducible) {
  rrtest::Rng rng(406);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = rng.integer(1, 8);
    const Index n = m + rng.integer(0, 8 - m);
    const BimatrixGame g(rng.matrix(m, n), rng.matrix(m, n));
    ASSERT_EQ(game_rank(g), m);
    const ReductionCertificate c = reduce(g);
    EXPECT_NE(c.path, ReductionPath::None);
    EXPECT_LE(c.rank_after, m - 1);
    EXPECT_TRUE(replays(g, c));
  }
}

TEST(Reduce, PlantedGamesRecoverBaseRank) {
  rrtest::Rng rng(407);
  for (int trial = 0; trial < 60; ++trial) {
    const Index base_rank = trial % 2;
    const Index m = base_rank == 0 ? rng.integer(3, 4) : rng.integer(4, 5);
    const Index n = m + rng.integer(1, 2);
    const double gamma = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const PlantedGame pg = plant_pat_game(m, n, base_rank, gamma, static_cast<std::uint64_t>(trial));
    const ReductionCertificate c = reduce(pg.game);
    EXPECT_LE(c.rank_after, base_rank) << "m " << m << " n " << n << " gamma " << gamma;
    if (c.gamma_star != 1.0) {
      EXPECT_NEAR(c.gamma_star, gamma, 1e-6 * gamma);
    }
    EXPECT_TRUE(replays(pg.game, c));
  }
}

TEST(Reduce, PreservesEquilibriaOnSmallGames) {
  rrtest::Rng rng(408);
  int compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Index m = rng.integer(2, 4);
    const Index n = rng.integer(2, 4);
    const BimatrixGame g(rng.matrix(m, n), rng.matrix(m, n));
    const ReductionCertificate c = reduce(g);
    const EquilibriumSet before = enumerate_equilibria(g);
    const EquilibriumSet after = enumerate_equilibria(c.reduced);
    if (before.degenerate || after.degenerate) continue;
    ++compared;
    EXPECT_TRUE(equivalent(g, c.reduced)) << "path " << to_string(c.path);
  }
  EXPECT_GT(compared, 100);
}
