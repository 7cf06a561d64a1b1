#include <cmath>

#include <gtest/gtest.h>

#include "ica/curvature.hpp"
#include "ica/model.hpp"
#include "ica/rng.hpp"
#include "oracles.hpp"

using ica::BlockDiagApprox;
using ica::FullHessian;
using ica::MatrixXd;

TEST(FullHessian, ZeroSourcesGiveTransposeOperator) {
  const MatrixXd Y = MatrixXd::Zero(3, 40);
  const FullHessian H = FullHessian::compute(Y);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index l = 0; l < 3; ++l) EXPECT_DOUBLE_EQ(H.moment(i, j, l), 0.0);
  ica::Rng rng(1);
  const MatrixXd M = oracle::random_matrix(3, 3, rng);
  EXPECT_LE((H.apply(M) - M.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FullHessian, MomentsAreSymmetricInTrailingIndices) {
  ica::Rng rng(2);
  const MatrixXd Y = oracle::random_matrix(4, 200, rng, 1.5);
  const FullHessian H = FullHessian::compute(Y);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      for (Eigen::Index l = 0; l < 4; ++l)
        EXPECT_NEAR(H.moment(i, j, l), H.moment(i, l, j), 1e-14);
}

TEST(FullHessian, RefusesLargeProblems) {
  const MatrixXd Y = MatrixXd::Zero(33, 40);
  EXPECT_THROW(FullHessian::compute(Y), ica::invalid_data_error);
  EXPECT_NO_THROW(FullHessian::compute(MatrixXd::Zero(33, 40), 33));
}

TEST(FullHessian, QuadraticFormMatchesFiniteDifferences) {
  ica::Rng rng(3);
  for (int rep = 0; rep < 3; ++rep) {
    const MatrixXd W = oracle::random_unmixing(4, rng);
    const MatrixXd Y = oracle::random_matrix(4, 1000, rng, 1.3);
    const FullHessian H = FullHessian::compute(Y);
    MatrixXd E = oracle::random_matrix(4, 4, rng);
    E /= E.norm();
    const double analytic = H.quadratic_form(E);
    const double fd = oracle::fd_quadratic_form(W, Y, E, 1e-3);
    EXPECT_NEAR(analytic, fd, 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST(FullHessian, ReshapedIsSymmetricAndBoundsQuadraticForm) {
  ica::Rng rng(4);
  const MatrixXd Y = oracle::random_matrix(4, 300, rng);
  const FullHessian H = FullHessian::compute(Y);
  const MatrixXd R = H.reshaped();
  EXPECT_LE((R - R.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  const double lambda_m = H.min_eigenvalue();
  for (int rep = 0; rep < 5; ++rep) {
    MatrixXd E = oracle::random_matrix(4, 4, rng);
    E /= E.norm();
    EXPECT_GE(H.quadratic_form(E), lambda_m - 1e-10);
  }
}

TEST(HessianFreeProduct, MatchesDenseContraction) {
  ica::Rng rng(5);
  const MatrixXd Y = oracle::random_matrix(5, 500, rng, 1.4);
  const FullHessian H = FullHessian::compute(Y);
  for (int rep = 0; rep < 4; ++rep) {
    const MatrixXd M = oracle::random_matrix(5, 5, rng);
    const MatrixXd fast = ica::hessian_free_product(Y, M);
    const MatrixXd dense = H.apply(M);
    const MatrixXd scratch = oracle::dense_hessian_apply(Y, M);
    EXPECT_LE((fast - dense).norm() / dense.norm(), 1e-10);
    EXPECT_LE((fast - scratch).norm() / scratch.norm(), 1e-10);
  }
}

TEST(HessianFreeProduct, IsLinear) {
  ica::Rng rng(6);
  const MatrixXd Y = oracle::random_matrix(4, 250, rng);
  const MatrixXd M1 = oracle::random_matrix(4, 4, rng);
  const MatrixXd M2 = oracle::random_matrix(4, 4, rng);
  const MatrixXd lhs = ica::hessian_free_product(Y, 2.5 * M1 - 0.75 * M2);
  const MatrixXd rhs =
      2.5 * ica::hessian_free_product(Y, M1) - 0.75 * ica::hessian_free_product(Y, M2);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff() + 1e-15);
}

TEST(ApproxH2, ZeroSourcesGiveZeroCoefficients) {
  const BlockDiagApprox approx = ica::approx_h2(MatrixXd::Zero(4, 100));
  EXPECT_EQ(approx.kind, ica::PrecondKind::h2);
  EXPECT_FALSE(approx.regularized);
  EXPECT_LE(approx.a.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApproxH2, CoefficientsEqualFullHessianMoments) {
  ica::Rng rng(7);
  const MatrixXd Y = oracle::random_matrix(5, 400, rng, 1.2);
  const BlockDiagApprox approx = ica::approx_h2(Y);
  const FullHessian H = FullHessian::compute(Y);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j)
      EXPECT_NEAR(approx.a(i, j), H.moment(i, j, j), 1e-12);
}

TEST(ApproxH1, FactorizesOffDiagonalAndKeepsExactDiagonal) {
  ica::Rng rng(8);
  const MatrixXd Y = oracle::random_matrix(4, 350, rng, 1.6);
  const BlockDiagApprox approx = ica::approx_h1(Y);
  EXPECT_EQ(approx.kind, ica::PrecondKind::h1);
  const Eigen::Index t = Y.cols();
  for (Eigen::Index i = 0; i < 4; ++i) {
    long double h_i = 0.0L, diag = 0.0L;
    for (Eigen::Index s = 0; s < t; ++s) {
      const double th = std::tanh(0.5 * Y(i, s));
      const double pd = 0.5 * (1.0 - th * th);
      h_i += pd;
      diag += pd * Y(i, s) * Y(i, s);
    }
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (i == j) {
        EXPECT_NEAR(approx.a(i, i), static_cast<double>(diag / t), 1e-12);
        continue;
      }
      long double sig = 0.0L;
      for (Eigen::Index s = 0; s < t; ++s) sig += Y(j, s) * Y(j, s);
      const double expected = static_cast<double>(h_i / t) * static_cast<double>(sig / t);
      EXPECT_NEAR(approx.a(i, j), expected, 1e-12);
    }
  }
}

TEST(BlockEigenvalueMin, ClosedFormMatchesEigensolver) {
  EXPECT_DOUBLE_EQ(ica::block_eigenvalue_min(2.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(ica::block_eigenvalue_min(0.0, 0.0), -1.0);
  ica::Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const double a = 3.0 * rng.gaussian();
    const double b = 3.0 * rng.gaussian();
    EXPECT_NEAR(ica::block_eigenvalue_min(a, b), oracle::eig_min_2x2(a, b), 1e-12);
  }
}

TEST(Regularize, ShiftsDeficientBlocksAndClampsDiagonal) {
  const double lambda_min = 1e-2;
  BlockDiagApprox approx;
  approx.a = MatrixXd::Zero(3, 3);
  const BlockDiagApprox reg = ica::regularize(approx, lambda_min);
  EXPECT_TRUE(reg.regularized);
  EXPECT_DOUBLE_EQ(reg.lambda_min, lambda_min);
  // Every zero off-diagonal pair has min eigenvalue -1, so both coefficients
  // get shifted by lambda_min + 1; the zero diagonal is clamped.
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(reg.a(i, i), lambda_min);
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (i == j) continue;
      EXPECT_DOUBLE_EQ(reg.a(i, j), lambda_min + 1.0);
      EXPECT_GE(ica::block_eigenvalue_min(reg.a(i, j), reg.a(j, i)), lambda_min - 1e-12);
    }
  }
}

TEST(Regularize, LeavesHealthyBlocksUntouchedAndIsIdempotent) {
  ica::Rng rng(10);
  const MatrixXd Y = oracle::random_matrix(5, 300, rng, 1.1);
  const BlockDiagApprox approx = ica::approx_h2(Y);
  const BlockDiagApprox reg1 = ica::regularize(approx, 1e-2);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = i + 1; j < 5; ++j) {
      EXPECT_GE(ica::block_eigenvalue_min(reg1.a(i, j), reg1.a(j, i)), 1e-2 - 1e-12);
      if (ica::block_eigenvalue_min(approx.a(i, j), approx.a(j, i)) >= 1e-2) {
        EXPECT_DOUBLE_EQ(reg1.a(i, j), approx.a(i, j));  // untouched bit for bit
        EXPECT_DOUBLE_EQ(reg1.a(j, i), approx.a(j, i));
      }
    }
    EXPECT_GE(reg1.a(i, i), 1e-2);
  }
  const BlockDiagApprox reg2 = ica::regularize(reg1, 1e-2);
  EXPECT_LE((reg2.a - reg1.a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Regularize, RequiresPositiveFloor) {
  BlockDiagApprox approx;
  approx.a = MatrixXd::Zero(2, 2);
  EXPECT_THROW(ica::regularize(approx, 0.0), ica::invalid_data_error);
  EXPECT_THROW(ica::regularize(approx, -1.0), ica::invalid_data_error);
}

TEST(BlockSolve, ClosedFormPairExample) {
  BlockDiagApprox approx;
  approx.a = MatrixXd::Constant(2, 2, 2.0);
  MatrixXd G = MatrixXd::Zero(2, 2);
  G(0, 1) = 1.0;
  const MatrixXd Z = ica::block_solve(approx, G);
  EXPECT_DOUBLE_EQ(Z(0, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(Z(1, 0), -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(Z(0, 0), 0.0);
  G(0, 0) = 3.0;
  EXPECT_DOUBLE_EQ(ica::block_solve(approx, G)(0, 0), 1.5);
}

TEST(BlockSolve, ThrowsOnSingularBlocks) {
  BlockDiagApprox approx;
  approx.a = MatrixXd::Constant(2, 2, 1.0);  // a_01 a_10 = 1
  EXPECT_THROW(ica::block_solve(approx, MatrixXd::Zero(2, 2)),
               ica::singular_preconditioner_error);
  approx.a = MatrixXd::Constant(2, 2, 2.0);
  approx.a(1, 1) = 0.0;
  EXPECT_THROW(ica::block_solve(approx, MatrixXd::Zero(2, 2)),
               ica::singular_preconditioner_error);
}

TEST(BlockSolve, MatchesDenseVectorizedSystem) {
  ica::Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const MatrixXd Y = oracle::random_matrix(6, 200, rng, 1.3);
    const BlockDiagApprox reg = ica::regularize(ica::approx_h2(Y), 1e-2);
    const MatrixXd G = oracle::random_matrix(6, 6, rng);
    const MatrixXd fast = ica::block_solve(reg, G);
    const MatrixXd dense = oracle::dense_block_system_solve(reg.a, G);
    EXPECT_LE((fast - dense).norm() / dense.norm(), 1e-10);
  }
}

TEST(BlockSolve, InvertsBlockApply) {
  ica::Rng rng(12);
  const MatrixXd Y = oracle::random_matrix(5, 250, rng);
  const BlockDiagApprox reg = ica::regularize(ica::approx_h2(Y), 1e-2);
  const MatrixXd M = oracle::random_matrix(5, 5, rng);
  const MatrixXd round1 = ica::block_solve(reg, ica::block_apply(reg, M));
  const MatrixXd round2 = ica::block_apply(reg, ica::block_solve(reg, M));
  EXPECT_LE((round1 - M).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((round2 - M).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ApproxH2, CrossMomentsVanishForIndependentSources) {
  // For independent sources the moments E[psi'_i y_j y_l] with j != l are
  // O(1/sqrt(T)), which is what makes the block approximation asymptotically
  // exact off its blocks.
  ica::Rng rng(13);
  const Eigen::Index n = 5, t = 100000;
  MatrixXd Y(n, t);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index s = 0; s < t; ++s) Y(i, s) = rng.laplace();
  const FullHessian H = FullHessian::compute(Y);
  const double bound = 10.0 / std::sqrt(static_cast<double>(t));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l) {
        if (j == l) continue;
        EXPECT_LE(std::abs(H.moment(i, j, l)), bound)
            << "moment (" << i << "," << j << "," << l << ")";
      }
}
