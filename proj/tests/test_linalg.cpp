#include "dpmat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dpmat/errors.hpp"
#include "dpmat/rng.hpp"
#include "test_util.hpp"

namespace dpmat {
namespace {

Matrix random_symmetric(Rng& rng, int d) {
  Matrix A(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) A(i, j) = rng.gaussian();
  }
  return ((A + A.transpose()) * 0.5).eval();
}

TEST(SymEigen, DiagonalCase) {
  Matrix S = Vector::Zero(2).asDiagonal();
  S(0, 0) = 3.0;
  S(1, 1) = 1.0;
  EigenPair ep = sym_eigen(S);
  EXPECT_DOUBLE_EQ(ep.values(0), 3.0);
  EXPECT_DOUBLE_EQ(ep.values(1), 1.0);
  EXPECT_NEAR((ep.vectors.col(0) - Vector::Unit(2, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((ep.vectors.col(1) - Vector::Unit(2, 1)).norm(), 0.0, 1e-12);
}

TEST(SymEigen, ZeroMatrix) {
  Matrix S = Matrix::Zero(4, 4);
  EigenPair ep = sym_eigen(S);
  EXPECT_NEAR(ep.values.cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(SymEigen, ReconstructionResidual) {
  Rng rng(101, "eig");
  for (int trial = 0; trial < 20; ++trial) {
    Matrix S = random_symmetric(rng, 5);
    EigenPair ep = sym_eigen(S);
    Matrix R = ep.vectors * ep.values.asDiagonal() * ep.vectors.transpose();
    EXPECT_LT((R - S).norm(), 1e-8 * std::max(1.0, S.norm()));
    // Descending order and orthonormality.
    for (int i = 0; i + 1 < 5; ++i) EXPECT_GE(ep.values(i), ep.values(i + 1));
    EXPECT_LT((ep.vectors.transpose() * ep.vectors - Matrix::Identity(5, 5))
                  .norm(),
              1e-10);
  }
}

TEST(SymEigen, RejectsNonFinite) {
  Matrix S = Matrix::Zero(2, 2);
  S(0, 0) = std::nan("");
  EXPECT_THROW(sym_eigen(S), InputError);
}

TEST(SymEigen, RejectsAsymmetric) {
  Matrix S(2, 2);
  S << 1.0, 2.0, 0.5, 1.0;
  EXPECT_THROW(sym_eigen(S), InputError);
}

TEST(PsdDominates, TrivialAndDerivedExamples) {
  Matrix Z = Matrix::Zero(2, 2);
  Matrix I = Matrix::Identity(2, 2);
  EXPECT_TRUE(psd_dominates(Z, I, 0.0));
  EXPECT_FALSE(psd_dominates(2.0 * I, I, 0.0));
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 3.0;
  Matrix B = Matrix::Zero(2, 2);
  B(0, 0) = 2.0;
  B(1, 1) = 2.0;
  // B - A = diag(1, -1) has a negative eigenvalue.
  EXPECT_FALSE(psd_dominates(A, B, 0.0));
  EXPECT_FALSE(psd_dominates(B, A, 0.0));
}

TEST(PsdDominates, DimensionMismatch) {
  EXPECT_THROW(
      psd_dominates(Matrix::Zero(2, 2), Matrix::Zero(3, 3), 0.0),
      InputError);
}

TEST(PsdDominates, NumericalTransitivity) {
  Rng rng(102, "trans");
  for (int trial = 0; trial < 20; ++trial) {
    Matrix A = random_symmetric(rng, 4);
    Matrix G1 = random_symmetric(rng, 4);
    Matrix G2 = random_symmetric(rng, 4);
    // Build A <= B <= C by adding squared (PSD) gaps.
    Matrix B = A + G1 * G1.transpose();
    Matrix C = B + G2 * G2.transpose();
    ASSERT_TRUE(psd_dominates(A, B, 0.0));
    ASSERT_TRUE(psd_dominates(B, C, 0.0));
    const double tol =
        1e-9 * (spectral_norm_sym(A) + spectral_norm_sym(C));
    EXPECT_TRUE(psd_dominates(A, C, tol));
  }
}

TEST(TopKRightSubspace, DiagonalAndFullRank) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = 1.0;
  Matrix V1 = top_k_right_subspace(A, 1);
  EXPECT_NEAR((V1 - Vector::Unit(2, 0)).norm(), 0.0, 1e-12);

  Matrix Vd = top_k_right_subspace(A, 2);
  EXPECT_LT((Vd * Vd.transpose() - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(TopKRightSubspace, ExactRankRecovery) {
  Rng rng(103, "rank2");
  Matrix basis = test::random_orthonormal_rows(rng, 2, 4);
  Matrix A(10, 4);
  for (int i = 0; i < 10; ++i) A.row(i) = test::planted_row(rng, basis);
  Matrix V2 = top_k_right_subspace(A, 2);
  EXPECT_LT((A * (Matrix::Identity(4, 4) - V2 * V2.transpose())).norm(),
            1e-8);
}

TEST(TopKRightSubspace, SignConvention) {
  Rng rng(104, "sign");
  Matrix A(6, 3);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 3; ++j) A(i, j) = rng.gaussian();
  }
  Matrix V = top_k_right_subspace(A, 3);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(V(i, j)) > 1e-12) {
        EXPECT_GT(V(i, j), 0.0);
        break;
      }
    }
  }
  EXPECT_THROW(top_k_right_subspace(A, 4), InputError);
}

TEST(Pinv, IdentityAndDiagonal) {
  EXPECT_LT((pinv(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm(),
            1e-12);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2.0;
  Matrix Dp = pinv(D);
  EXPECT_NEAR(Dp(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(Dp(1, 1), 0.0, 1e-12);
}

TEST(Pinv, PenroseIdentities) {
  Rng rng(105, "pinv");
  for (int trial = 0; trial < 10; ++trial) {
    // Random PSD rank-3 of dim 5.
    Matrix G(5, 3);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 3; ++j) G(i, j) = rng.gaussian();
    }
    Matrix S = G * G.transpose();
    S = ((S + S.transpose()) * 0.5).eval();
    Matrix P = pinv(S);
    const double scale = std::max(1.0, S.norm());
    EXPECT_LT((S * P * S - S).norm(), 1e-8 * scale);
    EXPECT_LT((P * S * P - P).norm(), 1e-8 * std::max(1.0, P.norm()));
    EXPECT_LT((S * P - (S * P).transpose()).norm(), 1e-8 * scale);
    EXPECT_LT((P * S - (P * S).transpose()).norm(), 1e-8 * scale);
  }
}

TEST(SolveRankConstrained, EckartYoungIdentityCase) {
  Rng rng(106, "ey");
  Matrix F(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) F(i, j) = rng.gaussian();
  }
  Matrix I = Matrix::Identity(4, 4);
  Matrix X = solve_rank_constrained(I, I, F, 2);
  EXPECT_LT((X - truncate_rank(F, 2)).norm(), 1e-10);

  // Rank <= k input reproduces F exactly.
  Matrix low = truncate_rank(F, 2);
  Matrix X2 = solve_rank_constrained(I, I, low, 2);
  EXPECT_LT((X2 - low).norm(), 1e-8);
}

TEST(SolveRankConstrained, MatchesBruteForceOverTopDirections) {
  Rng rng(107, "brute");
  const int d = 6, k = 2;
  Matrix C = test::random_orthonormal_rows(rng, 4, d).transpose();  // d x 4
  Matrix R = test::random_orthonormal_rows(rng, 3, d);              // 3 x d
  Matrix F(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) F(i, j) = rng.gaussian();
  }
  Matrix X = solve_rank_constrained(C, R, F, k);
  const double res = (C * X * R - F).norm();

  // Brute force: truncations built from every pair of singular directions
  // of C^T F R^T can only do as well.
  Matrix M = C.transpose() * F * R.transpose();
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int n = static_cast<int>(svd.singularValues().size());
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      Matrix cand = svd.singularValues()(a) * svd.matrixU().col(a) *
                        svd.matrixV().col(a).transpose() +
                    svd.singularValues()(b) * svd.matrixU().col(b) *
                        svd.matrixV().col(b).transpose();
      best = std::min(best, (C * cand * R - F).norm());
    }
  }
  EXPECT_LE(res, best + 1e-9);
  EXPECT_THROW(solve_rank_constrained(C, R, F, 5), InputError);
}

TEST(SolveRankConstrained, RejectsNonOrthonormal) {
  Matrix C = 2.0 * Matrix::Identity(3, 3);
  Matrix F = Matrix::Identity(3, 3);
  EXPECT_THROW(solve_rank_constrained(C, Matrix::Identity(3, 3), F, 1),
               InputError);
}

TEST(ProjectionValidation, AcceptsRealRejectsFake) {
  Rng rng(108, "proj");
  Matrix basis = test::random_orthonormal_rows(rng, 2, 5);
  Projection p;
  p.dim = 5;
  p.rank = 2;
  p.P = basis.transpose() * basis;
  EXPECT_TRUE(validate_projection(p));

  Projection bad = p;
  bad.P(0, 0) += 0.5;
  EXPECT_FALSE(validate_projection(bad));

  Projection wrong_rank = p;
  wrong_rank.rank = 3;
  EXPECT_FALSE(validate_projection(wrong_rank));
}

TEST(PsdHelpers, SqrtAndClip) {
  Rng rng(109, "sqrt");
  Matrix S = random_symmetric(rng, 4);
  Matrix C = clip_psd(S);
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);

  Matrix B = sym_psd_sqrt(C);
  EXPECT_LT((B * B - C).norm(), 1e-9 * std::max(1.0, C.norm()));
  EXPECT_LT((B.transpose() * B - C).norm(), 1e-9 * std::max(1.0, C.norm()));
}

}  // namespace
}  // namespace dpmat
