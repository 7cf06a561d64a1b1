#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>
#include <string>

#include "ica/error.hpp"
#include "ica/types.hpp"

namespace ica {

namespace detail {
inline constexpr double kLog2 = 0.6931471805599453094;
}

// Score psi(y) = -d/dy log p(y) = tanh(y/2) for the fixed density
// p(y) proportional to 1/cosh^2(y/2).  Odd, bounded in (-1, 1).
inline double score(double y) { return std::tanh(0.5 * y); }

// psi'(y) = (1 - tanh^2(y/2)) / 2.  Even, in (0, 1/2], psi'(0) = 1/2.
inline double score_deriv(double y) {
  const double s = std::tanh(0.5 * y);
  return 0.5 * (1.0 - s * s);
}

inline MatrixXd score(const MatrixXd& Y) { return (0.5 * Y.array()).tanh().matrix(); }

inline MatrixXd score_deriv(const MatrixXd& Y) {
  return (0.5 * (1.0 - (0.5 * Y.array()).tanh().square())).matrix();
}

// -log p(y) = 2 log cosh(y/2), normalized so the value at 0 is 0 (the
// density's normalization constant is dropped).  Evaluated in the
// overflow-safe form |y| + 2 log1p(e^-|y|) - 2 log 2.
inline double neglog_density(double y) {
  const double a = std::abs(y);
  return a + 2.0 * std::log1p(std::exp(-a)) - 2.0 * detail::kLog2;
}

namespace detail {

// Sum of -log p (without the normalization constant) over all entries of
// Y.  Column sums are vectorized; the cross-column accumulation runs in
// long double because line searches near the gradient tolerance must
// resolve loss decreases of order 1e-15, which plain double summation
// noise over N*T terms would bury.
inline long double neglog_density_sum(const MatrixXd& Y) {
  long double total = 0.0L;
  for (Index j = 0; j < Y.cols(); ++j) {
    const auto a = Y.col(j).array().abs();
    total += (a + 2.0 * (-a).exp().log1p()).sum();
  }
  return total;
}

inline double log_abs_det(const MatrixXd& W) {
  Eigen::PartialPivLU<MatrixXd> lu(W);
  return lu.matrixLU().diagonal().array().abs().log().sum();
}

// Loss assembled from a precomputed density sum, so the line search can
// reuse candidate sums it already holds.  Reports non-finite values
// instead of throwing; callers treat them as rejected candidates.
inline double loss_from_sum(const MatrixXd& W, long double density_sum, Index rows,
                            Index cols) {
  const long double mean = density_sum / static_cast<long double>(rows * cols);
  return -log_abs_det(W) +
         (static_cast<double>(mean) - 2.0 * kLog2) * static_cast<double>(rows);
}

inline double loss_unchecked(const MatrixXd& W, const MatrixXd& Y) {
  return loss_from_sum(W, neglog_density_sum(Y), Y.rows(), Y.cols());
}

}  // namespace detail

// Negative average log likelihood of the unmixing matrix W given the
// source estimate Y = W X:
//
//   L = -log|det W| + (1/T) sum_{i,t} 2 log cosh(y_it / 2),
//
// normalized so that L(I, 0) = 0.  Y is passed alongside W so callers
// maintaining Y incrementally do not pay an extra product.
inline double loss(const MatrixXd& W, const MatrixXd& Y) {
  const double value = detail::loss_unchecked(W, Y);
  if (!std::isfinite(value)) {
    throw nonfinite_loss_error("loss is non-finite (singular W or overflowing Y)");
  }
  return value;
}

// Relative (natural) gradient of the loss at W:
//
//   G = (1/T) psi(Y) Y^T - I,
//
// the matrix such that L((I + E) W) = L(W) + <G|E> + O(|E|^2) under the
// Frobenius inner product.  One N x T times T x N product.
inline MatrixXd relative_gradient(const MatrixXd& Y) {
  const double t = static_cast<double>(Y.cols());
  MatrixXd g = score(Y) * Y.transpose() / t;
  g.diagonal().array() -= 1.0;
  return g;
}

// Solver state pairing an unmixing matrix with its source estimate.
// Invariant: Y == W * X for the data the state was built from; solvers
// update both sides with the same relative factor to preserve it.
struct UnmixingState {
  MatrixXd W;
  MatrixXd Y;

  // Max-norm drift of Y relative to W * X; refresh when above ~1e-10.
  double drift(const MatrixXd& X) const {
    const double scale = Y.cwiseAbs().maxCoeff();
    const double diff = (Y - W * X).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
  }
};

}  // namespace ica
