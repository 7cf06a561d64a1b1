#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "ica/model.hpp"
#include "ica/types.hpp"

namespace ica {

struct LineSearchResult {
  bool success = false;
  double alpha = 0.0;
  double loss = 0.0;   // loss at the accepted point; input loss on failure
  int tries = 0;       // candidates evaluated
  MatrixXd W;          // accepted state; empty on failure
  MatrixXd Y;
};

// Backtracking search along the relative update W <- (I + alpha p) W,
// Y <- (I + alpha p) Y with alpha = 1, 1/2, 1/4, ...  Accepts the first
// candidate with a finite, strictly smaller loss; gives up after n_tries
// candidates.  Non-finite candidates count as failed tries.
//
// The decrease is tested in the cancelled form
//
//   (sum_cand - sum) / T  <  log|det(I + alpha p)|,
//
// which is the exact loss difference with log|det W| removed: both sides
// shrink with the step, so the comparison stays resolvable (the density
// sums are long double) even when the decrease is below one ulp of the
// loss itself.  Comparing two full double losses instead stalls solvers
// around gradient norms of 1e-7, where the LU rounding noise of
// log|det W| alone already exceeds the true decrease of ~|G|^2 / 2.
//
// p Y is formed once; every candidate is then an axpy plus a Theta(N T)
// density sum, so the whole search costs one shaped product.
inline LineSearchResult backtracking_line_search(const MatrixXd& W, const MatrixXd& Y,
                                                 const MatrixXd& p, double loss0,
                                                 int n_tries) {
  LineSearchResult result;
  result.loss = loss0;
  const MatrixXd pw = p * W;
  const MatrixXd py = p * Y;
  const MatrixXd eye = MatrixXd::Identity(W.rows(), W.cols());
  const long double sum0 = detail::neglog_density_sum(Y);
  const long double t = static_cast<long double>(Y.cols());
  double alpha = 1.0;
  for (int k = 1; k <= n_tries; ++k, alpha *= 0.5) {
    const double gain = detail::log_abs_det(eye + alpha * p);
    MatrixXd y_cand = Y + alpha * py;
    const long double sum_cand = detail::neglog_density_sum(y_cand);
    result.tries = k;
    if (std::isfinite(gain) && std::isfinite(static_cast<double>(sum_cand)) &&
        (sum_cand - sum0) / t < static_cast<long double>(gain)) {
      result.success = true;
      result.alpha = alpha;
      result.W = W + alpha * pw;
      result.Y = std::move(y_cand);
      result.loss = detail::loss_from_sum(result.W, sum_cand, Y.rows(), Y.cols());
      return result;
    }
  }
  return result;
}

}  // namespace ica
