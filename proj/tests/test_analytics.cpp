#include "dpmat/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "dpmat/errors.hpp"
#include "dpmat/oracle.hpp"
#include "dpmat/rng.hpp"
#include "test_util.hpp"

namespace dpmat {
namespace {

HistogramConfig exact_config(int d, std::uint64_t W, int r = 14) {
  HistogramConfig cfg;
  cfg.mode = Mode::exact;
  cfg.W = W;
  cfg.eta = 0.25;
  cfg.r = r;
  cfg.d = d;
  cfg.beta = 0.1;
  return cfg;
}

TEST(SpectralApprox, ExactModeIsPlainCovariance) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(2, 8));
  Vector a(2);
  a << 0.6, 0.8;
  h.ingest(a);
  SpectralAnswer ans = spectral_approx(h, false);
  EXPECT_DOUBLE_EQ(ans.sigma_shift, 0.0);
  EXPECT_FALSE(ans.clipped);
  EXPECT_LT((ans.C - a * a.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SpectralApprox, JlShiftAndClip) {
  HistogramConfig cfg;
  cfg.mode = Mode::jl;
  cfg.W = 8;
  cfg.eta = 0.25;
  cfg.r = 2;
  cfg.d = 3;
  cfg.seed = 2;
  cfg.budget = make_budget(1.0, 1e-4);
  SpectralHistogram h = SpectralHistogram::make(cfg);
  h.ingest(Vector::Zero(3));

  SpectralAnswer raw = spectral_approx(h, false);
  EXPECT_DOUBLE_EQ(raw.sigma_shift, h.sigma() * h.sigma());
  Matrix want =
      h.cov(0) - raw.sigma_shift * Matrix::Identity(3, 3);
  EXPECT_LT((raw.C - want).cwiseAbs().maxCoeff(), 1e-9);

  SpectralAnswer clip = spectral_approx(h, true);
  EXPECT_TRUE(clip.clipped);
  Eigen::SelfAdjointEigenSolver<Matrix> es(clip.C);
  EXPECT_GE(es.eigenvalues().minCoeff(),
            -1e-10 * std::max(1.0, spectral_norm_sym(clip.C)));
}

TEST(SpectralApprox, ExactSandwichOverWindowedStream) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(3, 32));
  WindowBuffer buf(32, 3);
  Rng rng(41, "stream");
  for (int t = 0; t < 100; ++t) {
    Vector a = test::scaled_row(rng, 3);
    h.ingest(a);
    buf.push(a);
    Matrix C = spectral_approx(h, false).C;
    ASSERT_TRUE(sandwich_check(C, buf.exact_covariance(), 1.0,
                               1.0 / (1.0 - 0.25), 0.0, 0.0));
  }
}

TEST(Pca, RecoversPlantedDirection) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(2, 16));
  for (int i = 0; i < 5; ++i) h.ingest(Vector::Unit(2, 0));
  h.ingest(Vector::Unit(2, 1));
  Projection p = pca(h, 1);
  EXPECT_EQ(p.rank, 1);
  EXPECT_NEAR(p.P(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(p.P(1, 1), 0.0, 1e-10);
}

TEST(Pca, FullRankIsIdentity) {
  SpectralHistogram h =
      SpectralHistogram::make(exact_config(3, 16, pca_rank_param(3, 0.25, 0.1)));
  Rng rng(42, "rows");
  for (int i = 0; i < 10; ++i) h.ingest(test::scaled_row(rng, 3));
  Projection p = pca(h, 3);
  EXPECT_LT((p.P - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(pca(h, 0), InputError);
  EXPECT_THROW(pca(h, 4), InputError);
}

TEST(Pca, MatchesExactOracleWhenWindowCoversStream) {
  // W exceeds the stream length, so the head checkpoint covariance is the
  // full covariance and the summary PCA must coincide with the oracle.
  SpectralHistogram h = SpectralHistogram::make(exact_config(4, 256));
  WindowBuffer buf(256, 4);
  Rng rng(43, "rows");
  for (int i = 0; i < 60; ++i) {
    Vector a = test::scaled_row(rng, 4);
    h.ingest(a);
    buf.push(a);
  }
  Projection mine = pca(h, 1);
  Projection oracle = exact_pca(buf, 1);
  EXPECT_LT((mine.P - oracle.P).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(pca_residual_cov(buf.exact_covariance(), mine),
              pca_residual(buf, oracle), 1e-9);
}

TEST(PcaRankParam, HandValuesAndValidation) {
  // (1 + ln 10)/0.25 = 13.21 -> 14.
  EXPECT_EQ(pca_rank_param(1, 0.25, 0.1), 14);
  EXPECT_EQ(pca_rank_param(4, 0.25, 0.1), 26);
  EXPECT_THROW(pca_rank_param(0, 0.25, 0.1), InputError);
  EXPECT_THROW(pca_rank_param(1, 0.0, 0.1), InputError);
  EXPECT_THROW(pca_rank_param(1, 0.25, 1.0), InputError);
}

TEST(ConstrainedPca, SvdHookMatchesPlainPca) {
  SpectralHistogram h = SpectralHistogram::make(
      exact_config(4, 64, pca_rank_param(2, 0.25, 0.1)));
  Rng rng(44, "rows");
  for (int i = 0; i < 40; ++i) h.ingest(test::scaled_row(rng, 4));
  Projection a = pca(h, 2);
  Projection b = constrained_pca(h, 2, svd_hook());
  EXPECT_LT((a.P - b.P).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(svd_hook().gamma, 1.0);
}

TEST(ConstrainedPca, SparseHookPicksHeaviestCoordinates) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(4, 64));
  // Mass on coordinates 1 and 3 only, with 3 heavier.
  for (int i = 0; i < 3; ++i) h.ingest(0.9 * Vector::Unit(4, 1));
  for (int i = 0; i < 5; ++i) h.ingest(0.9 * Vector::Unit(4, 3));
  Projection p = constrained_pca(h, 2, sparse_hook());
  EXPECT_TRUE(validate_projection(p));
  EXPECT_NEAR(p.P(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(p.P(3, 3), 1.0, 1e-12);
  EXPECT_NEAR(p.P.trace(), 2.0, 1e-12);
  // Off-diagonal must vanish: the constraint set is coordinate subsets.
  EXPECT_NEAR(p.P.cwiseAbs().sum(), 2.0, 1e-12);
}

TEST(ConstrainedPca, NonnegHookFindsNonnegativeDirection) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(2, 64));
  Vector star(2);
  star << 0.6, 0.8;
  Rng rng(45, "scale");
  for (int i = 0; i < 20; ++i) h.ingest(rng.uniform01() * star);
  Projection p = constrained_pca(h, 1, nonneg_hook());
  EXPECT_TRUE(validate_projection(p));
  EXPECT_GE(p.P.minCoeff(), -1e-9);
  EXPECT_LT((p.P - star * star.transpose()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(constrained_pca(h, 2, nonneg_hook()), InputError);
}

TEST(ConstrainedPca, RejectsContractViolations) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(3, 16));
  Rng rng(46, "rows");
  for (int i = 0; i < 8; ++i) h.ingest(test::scaled_row(rng, 3));

  SolverHook shrink;
  shrink.name = "shrink";
  shrink.solve = [](const Matrix& factor, int k) {
    Projection p;
    p.dim = static_cast<int>(factor.cols());
    p.rank = k;
    p.P = 0.5 * Matrix::Identity(p.dim, p.dim);  // not idempotent
    return p;
  };
  EXPECT_THROW(constrained_pca(h, 1, shrink), ContractError);

  SolverHook wrong_dim;
  wrong_dim.name = "wrong-dim";
  wrong_dim.solve = [](const Matrix&, int k) {
    Projection p;
    p.dim = 2;
    p.rank = k;
    p.P = Matrix::Identity(2, 2);
    return p;
  };
  EXPECT_THROW(constrained_pca(h, 1, wrong_dim), ContractError);

  SolverHook empty;
  EXPECT_THROW(constrained_pca(h, 1, empty), InputError);
}

TEST(Regress, PlantedMapAndModeGating) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(3, 16));
  Vector r1(3), r2(3);
  r1 << 0.4, 0.0, 0.4;  // b = 1*a1 + 2*a2 with a = (0.4, 0)
  r2 << 0.0, 0.3, 0.6;
  h.ingest(r1);
  h.ingest(r2);
  RegressionAnswer ans = regress(h, 1);
  ASSERT_EQ(ans.X.rows(), 2);
  EXPECT_NEAR(ans.X(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(ans.X(1, 0), 2.0, 1e-10);
  EXPECT_NEAR(ans.objective, 0.0, 1e-10);

  EXPECT_THROW(regress(h, 0), InputError);
  EXPECT_THROW(regress(h, 3), InputError);

  HistogramConfig jl = exact_config(3, 16);
  jl.mode = Mode::jl;
  jl.budget = make_budget(1.0, 1e-4);
  SpectralHistogram hj = SpectralHistogram::make(jl);
  hj.ingest(r1);
  EXPECT_THROW(regress(hj, 1), InputError);

  HistogramConfig wis = exact_config(3, 16);
  wis.mode = Mode::wishart;
  wis.budget = make_budget(1.0, 1e-4);
  SpectralHistogram hw = SpectralHistogram::make(wis);
  EXPECT_THROW(regress(hw, 1), StateError);
}

TEST(Regress, MatchesOracleWhenWindowCoversStream) {
  SpectralHistogram h = SpectralHistogram::make(exact_config(5, 256));
  WindowBuffer buf(256, 5);
  Rng rng(47, "rows");
  for (int i = 0; i < 80; ++i) {
    Vector a = test::scaled_row(rng, 5);
    h.ingest(a);
    buf.push(a);
  }
  RegressionAnswer ans = regress(h, 2);
  Matrix oracle = exact_regress(buf, 2);
  EXPECT_LT((ans.X - oracle).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(ans.objective, regress_objective(buf, 2, oracle), 1e-9);
}

TEST(DirectionalVariance, QuadraticFormAndValidation) {
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 2.0;
  C(1, 1) = 5.0;
  EXPECT_DOUBLE_EQ(directional_variance(C, Vector::Unit(2, 0)), 2.0);
  EXPECT_DOUBLE_EQ(directional_variance(C, Vector::Unit(2, 1)), 5.0);

  Vector x(2);
  x << 0.6, 0.8;
  EXPECT_NEAR(directional_variance(C, x), 2.0 * 0.36 + 5.0 * 0.64, 1e-12);

  EXPECT_THROW(directional_variance(C, 2.0 * x), InputError);
  EXPECT_THROW(directional_variance(C, Vector::Unit(3, 0)), InputError);
  Matrix asym(2, 2);
  asym << 1.0, 1.0, 0.0, 1.0;
  EXPECT_THROW(directional_variance(asym, Vector::Unit(2, 0)), InputError);
}

TEST(CutQuery, DiagonalDedupAndClamp) {
  Matrix C = Matrix::Zero(3, 3);
  C(0, 0) = 4.0;
  C(1, 1) = 9.0;
  EXPECT_DOUBLE_EQ(cut_query(C, {0}), 2.0);
  EXPECT_DOUBLE_EQ(cut_query(C, {1}), 3.0);
  EXPECT_DOUBLE_EQ(cut_query(C, {0, 0, 1}), cut_query(C, {0, 1}));
  EXPECT_THROW(cut_query(C, {}), InputError);
  EXPECT_THROW(cut_query(C, {3}), InputError);
  EXPECT_THROW(cut_query(C, {-1}), InputError);
  EXPECT_DOUBLE_EQ(cut_query(-Matrix::Identity(2, 2), {0}), 0.0);
}

TEST(CutQuery, EdgeStreamCountsCrossingEdges) {
  // Each graph edge (u, v) enters the stream as (e_u - e_v)/sqrt(2), so
  // e_S^T C e_S is half the number of edges crossing (S, S-bar).
  const int n = 6;
  std::vector<std::pair<int, int>> edges = {{0, 1}, {0, 2}, {1, 2},
                                            {2, 3}, {3, 4}, {4, 5},
                                            {1, 4}, {0, 5}};
  SpectralHistogram h = SpectralHistogram::make(exact_config(n, 64));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (auto [u, v] : edges) {
    Vector row = Vector::Zero(n);
    row(u) = inv_sqrt2;
    row(v) = -inv_sqrt2;
    h.ingest(row);
  }
  Matrix C = spectral_approx(h, false).C;
  std::vector<std::vector<int>> cuts = {{0},       {5},    {0, 1, 2},
                                        {2, 3},    {0, 4}, {1, 3, 5},
                                        {0, 1, 2, 3, 4}};
  for (const auto& S : cuts) {
    int crossing = 0;
    for (auto [u, v] : edges) {
      const bool u_in =
          std::find(S.begin(), S.end(), u) != S.end();
      const bool v_in =
          std::find(S.begin(), S.end(), v) != S.end();
      if (u_in != v_in) ++crossing;
    }
    const double q = cut_query(C, S);
    EXPECT_NEAR(2.0 * q * q, crossing, 1e-9);
  }
}

TEST(BoundedVariance, RankParamHandValues) {
  EXPECT_EQ(variance_rank_param(1), 1);
  EXPECT_EQ(variance_rank_param(2), 2);
  EXPECT_EQ(variance_rank_param(3), 3);
  EXPECT_EQ(variance_rank_param(4), 3);
  EXPECT_EQ(variance_rank_param(1024), 11);
  EXPECT_THROW(variance_rank_param(0), InputError);
}

TEST(BoundedVariance, EnforcesQueryBudget) {
  BoundedVarianceQuerier q(3, 16, 0.25, make_budget(1.0, 1e-4), 3, 5);
  EXPECT_EQ(q.budget_total(), 3);
  EXPECT_EQ(q.histogram().config().r, variance_rank_param(3));
  EXPECT_THROW(q.summary_c(), StateError);

  Rng rng(48, "rows");
  for (int i = 0; i < 10; ++i) q.ingest(test::scaled_row(rng, 3));
  // The summary is the raw sketch Gram, deliberately unshifted.
  EXPECT_DOUBLE_EQ(
      (q.summary_c() - q.histogram().cov(0)).cwiseAbs().maxCoeff(), 0.0);

  Vector x = Vector::Unit(3, 0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(q.query(x), 0.0);
  }
  EXPECT_EQ(q.budget_used(), 3);
  EXPECT_THROW(q.query(x), BudgetError);
}

}  // namespace
}  // namespace dpmat
