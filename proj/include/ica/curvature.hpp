#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ica/error.hpp"
#include "ica/model.hpp"
#include "ica/types.hpp"

namespace ica {

// ---------------------------------------------------------------------------
// Exact relative Hessian.
//
// The loss's second-order term at W in relative coordinates is the tensor
//
//   H_ijkl = delta_il delta_jk + delta_ik h_ijl,   h_ijl = E[psi'_i(y_i) y_j y_l],
//
// acting on perturbations E by (H E)_ij = sum_kl H_ijkl E_kl.  Dense storage
// is Theta(N^4) and the moments Theta(N^3), so construction is capped at
// small N; this class serves as a test oracle and as the spectral
// regularization step of the truncated-Newton baseline.
// ---------------------------------------------------------------------------
class FullHessian {
 public:
  static constexpr Index kDefaultCap = 32;

  // Theta(N^3 T) moment accumulation.  Throws invalid_data_error when N
  // exceeds the cap; raise it only with a matching memory budget.
  static FullHessian compute(const MatrixXd& Y, Index cap = kDefaultCap) {
    const Index n = Y.rows();
    if (n > cap) {
      throw invalid_data_error("FullHessian capped at N=" + std::to_string(cap) +
                               ", got N=" + std::to_string(n));
    }
    FullHessian full;
    full.n_ = n;
    full.moments_.assign(static_cast<std::size_t>(n * n * n), 0.0);
    const double t = static_cast<double>(Y.cols());
    const MatrixXd psi_d = score_deriv(Y);
    // h_ijl = (1/T) sum_t psi'(y_it) y_jt y_lt; symmetric in (j, l).
    for (Index i = 0; i < n; ++i) {
      MatrixXd weighted = (Y.array().rowwise() * psi_d.row(i).array()).matrix();  // N x T
      MatrixXd block = weighted * Y.transpose() / t;                              // N x N
      for (Index j = 0; j < n; ++j)
        for (Index l = 0; l < n; ++l) full.moments_[full.midx(i, j, l)] = block(j, l);
    }
    return full;
  }

  Index n() const { return n_; }

  double moment(Index i, Index j, Index l) const { return moments_[midx(i, j, l)]; }

  double entry(Index i, Index j, Index k, Index l) const {
    double value = 0.0;
    if (i == l && j == k) value += 1.0;
    if (i == k) value += moment(i, j, l);
    return value;
  }

  // Dense contraction (H M)_ij = sum_kl H_ijkl M_kl; Theta(N^4) reference
  // implementation, deliberately independent of hessian_free_product.
  MatrixXd apply(const MatrixXd& M) const {
    MatrixXd out = MatrixXd::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = 0; j < n_; ++j) {
        double acc = M(j, i);
        for (Index l = 0; l < n_; ++l) acc += moment(i, j, l) * M(i, l);
        out(i, j) = acc;
      }
    return out;
  }

  double quadratic_form(const MatrixXd& E) const {
    double acc = 0.0;
    for (Index i = 0; i < n_; ++i)
      for (Index j = 0; j < n_; ++j) acc += E(i, j) * apply_entry(E, i, j);
    return acc;
  }

  // The N^2 x N^2 matrix of the tensor under row-major index pairing
  // p = i N + j.  Exactly symmetric because h_ijl = h_ilj.
  MatrixXd reshaped() const {
    MatrixXd mat(n_ * n_, n_ * n_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = 0; j < n_; ++j)
        for (Index k = 0; k < n_; ++k)
          for (Index l = 0; l < n_; ++l) mat(i * n_ + j, k * n_ + l) = entry(i, j, k, l);
    return mat;
  }

  // Smallest eigenvalue of the symmetrized reshaped matrix.
  double min_eigenvalue() const {
    MatrixXd mat = reshaped();
    MatrixXd sym = 0.5 * (mat + mat.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
  }

 private:
  double apply_entry(const MatrixXd& M, Index i, Index j) const {
    double acc = M(j, i);
    for (Index l = 0; l < n_; ++l) acc += moment(i, j, l) * M(i, l);
    return acc;
  }

  std::size_t midx(Index i, Index j, Index l) const {
    return static_cast<std::size_t>((i * n_ + j) * n_ + l);
  }

  Index n_ = 0;
  std::vector<double> moments_;
};

// Exact Hessian-vector product without forming the tensor:
//
//   (H M) = M^T + (1/T) (psi'(Y) o (M Y)) Y^T,
//
// Theta(N^2 T) per call (two N x T shaped products).  o is the entrywise
// product.
inline MatrixXd hessian_free_product(const MatrixXd& Y, const MatrixXd& M) {
  const double t = static_cast<double>(Y.cols());
  MatrixXd my = M * Y;
  MatrixXd out = (score_deriv(Y).array() * my.array()).matrix() * Y.transpose() / t;
  out += M.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Sparse block-diagonal approximations.
//
// Dropping the cross moments leaves, per unordered pair (i, j), a symmetric
// 2x2 system coupling E_ij with E_ji:
//
//   [[a_ij, 1], [1, a_ji]],
//
// plus scalar diagonal coefficients a_ii.  The struct stores the full
// coefficient matrix a; kind records which moment estimate filled it.
// ---------------------------------------------------------------------------
struct BlockDiagApprox {
  MatrixXd a;
  PrecondKind kind = PrecondKind::h2;
  bool regularized = false;
  double lambda_min = 0.0;

  Index n() const { return a.rows(); }
};

// H2 approximation: a_ij = E[psi'_i(y_i) y_j^2] for all (i, j).  One
// N x T times T x N product.
inline BlockDiagApprox approx_h2(const MatrixXd& Y) {
  const double t = static_cast<double>(Y.cols());
  BlockDiagApprox approx;
  approx.kind = PrecondKind::h2;
  approx.a = score_deriv(Y) * Y.array().square().matrix().transpose() / t;
  return approx;
}

// H1 approximation: a_ij = E[psi'_i] E[y_j^2] for i != j, exact second
// moment a_ii = E[psi'_i y_i^2] on the diagonal.  Theta(N T) moments plus
// a Theta(N^2) outer product; no T-sized matrix product.
inline BlockDiagApprox approx_h1(const MatrixXd& Y) {
  BlockDiagApprox approx;
  approx.kind = PrecondKind::h1;
  const MatrixXd psi_d = score_deriv(Y);
  const VectorXd h = psi_d.rowwise().mean();
  const VectorXd sigma2 = Y.array().square().rowwise().mean().matrix();
  approx.a = h * sigma2.transpose();
  approx.a.diagonal() = (psi_d.array() * Y.array().square()).rowwise().mean().matrix();
  return approx;
}

// Smallest eigenvalue of the 2x2 block [[a_ij, 1], [1, a_ji]]:
//
//   lambda = (a_ij + a_ji - sqrt((a_ij - a_ji)^2 + 4)) / 2.
inline double block_eigenvalue_min(double a_ij, double a_ji) {
  const double d = a_ij - a_ji;
  return 0.5 * (a_ij + a_ji - std::sqrt(d * d + 4.0));
}

// Eigenvalue-shift regularization: any pair block whose smallest eigenvalue
// lies below lambda_min gets both its diagonal coefficients shifted up by
// the deficit, moving that eigenvalue to exactly lambda_min; scalar diagonal
// coefficients are clamped to lambda_min.  Idempotent; requires
// lambda_min > 0 so the result is positive definite.
inline BlockDiagApprox regularize(const BlockDiagApprox& approx, double lambda_min) {
  if (!(lambda_min > 0.0)) {
    throw invalid_data_error("regularize requires lambda_min > 0");
  }
  BlockDiagApprox out = approx;
  const Index n = out.n();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double lambda = block_eigenvalue_min(out.a(i, j), out.a(j, i));
      if (lambda < lambda_min) {
        const double shift = lambda_min - lambda;
        out.a(i, j) += shift;
        out.a(j, i) += shift;
      }
    }
    if (out.a(i, i) < lambda_min) out.a(i, i) = lambda_min;
  }
  out.regularized = true;
  out.lambda_min = lambda_min;
  return out;
}

// Solves the block system H~ Z = G in closed form, Theta(N^2):
//
//   Z_ij = (a_ji G_ij - G_ji) / (a_ij a_ji - 1)   for i != j,
//   Z_ii = G_ii / a_ii.
//
// Throws singular_preconditioner_error on an exactly singular block, which
// signals a missing regularize step.
inline MatrixXd block_solve(const BlockDiagApprox& approx, const MatrixXd& G) {
  const Index n = approx.n();
  MatrixXd z(n, n);
  for (Index i = 0; i < n; ++i) {
    if (approx.a(i, i) == 0.0) {
      throw singular_preconditioner_error("zero diagonal coefficient at channel " +
                                          std::to_string(i));
    }
    z(i, i) = G(i, i) / approx.a(i, i);
    for (Index j = i + 1; j < n; ++j) {
      const double det = approx.a(i, j) * approx.a(j, i) - 1.0;
      if (det == 0.0) {
        throw singular_preconditioner_error("singular 2x2 block at pair (" +
                                            std::to_string(i) + ", " + std::to_string(j) +
                                            ")");
      }
      z(i, j) = (approx.a(j, i) * G(i, j) - G(j, i)) / det;
      z(j, i) = (approx.a(i, j) * G(j, i) - G(i, j)) / det;
    }
  }
  return z;
}

// Forward action of the approximation, (H~ M)_ij = a_ij M_ij + M_ji for
// i != j and a_ii M_ii on the diagonal.  Inverse of block_solve on
// nonsingular blocks.
inline MatrixXd block_apply(const BlockDiagApprox& approx, const MatrixXd& M) {
  MatrixXd out = approx.a.cwiseProduct(M);
  const Index n = approx.n();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) out(i, j) += M(j, i);
  return out;
}

}  // namespace ica
