#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <string>
#include <utility>

#include "ica/error.hpp"
#include "ica/types.hpp"

namespace ica {

// Whitening operator K and the channel means removed before it was fit,
// kept so estimated unmixing matrices can be mapped back to sensor space
// (overall unmixer is W * matrix acting on centered data).
struct WhiteningTransform {
  MatrixXd matrix;
  VectorXd means;
};

// Removes the per-channel mean.  Returns the centered data and the means.
inline std::pair<DataMatrix, VectorXd> center(const DataMatrix& data) {
  VectorXd means = data.values().rowwise().mean();
  MatrixXd centered = data.values().colwise() - means;
  return {DataMatrix::from(std::move(centered)), std::move(means)};
}

// Whitens centered data: K = C^(-1/2) from the symmetric eigendecomposition
// of the sample covariance C = X X^T / T, so that cov(K X) = I.  Eigenvalues
// below 1e-12 times the largest are treated as numerically zero and whitening
// is refused, naming the offending channel count.
inline std::pair<DataMatrix, WhiteningTransform> whiten(const DataMatrix& centered) {
  const MatrixXd& X = centered.values();
  const double t = static_cast<double>(centered.n_samples());
  MatrixXd cov = X * X.transpose() / t;

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  const VectorXd& lambda = eig.eigenvalues();  // ascending
  const double threshold = 1e-12 * lambda(lambda.size() - 1);
  Index deficient = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < threshold) ++deficient;
  }
  if (deficient > 0 || !(lambda(lambda.size() - 1) > 0.0)) {
    throw rank_deficiency_error("sample covariance is rank deficient: " +
                                std::to_string(deficient > 0 ? deficient : lambda.size()) +
                                " of " + std::to_string(centered.n_channels()) +
                                " channels below threshold");
  }

  MatrixXd root_inv = eig.eigenvectors() *
                      lambda.array().rsqrt().matrix().asDiagonal() *
                      eig.eigenvectors().transpose();
  MatrixXd whitened = root_inv * X;
  return {DataMatrix::from(std::move(whitened)),
          WhiteningTransform{std::move(root_inv), VectorXd::Zero(centered.n_channels())}};
}

// center followed by whiten; the returned transform carries the removed
// means.  Postcondition: the output has zero row means and identity sample
// covariance up to numerical error.
inline std::pair<DataMatrix, WhiteningTransform> preprocess(const DataMatrix& raw) {
  auto [centered, means] = center(raw);
  auto [white, transform] = whiten(centered);
  transform.means = std::move(means);
  return {std::move(white), std::move(transform)};
}

}  // namespace ica
