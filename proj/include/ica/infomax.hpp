#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ica/error.hpp"
#include "ica/lbfgs.hpp"
#include "ica/model.hpp"
#include "ica/rng.hpp"
#include "ica/trace.hpp"
#include "ica/types.hpp"

namespace ica {

// Stochastic Infomax baseline.  One pass visits every sample once in
// mini-batches of `batch_size` drawn without replacement (seeded shuffle,
// re-drawn each pass); each batch applies the relative update
// W <- (I - alpha G') W with G' the batch gradient.  The step size anneals
// by `anneal` whenever the angle between consecutive batch gradients
// (under the Frobenius inner product) exceeds `angle_threshold` radians
// (default 60 degrees).
struct InfomaxConfig {
  int batch_size = 256;
  double alpha0 = 0.01;
  double anneal = 0.9;
  double angle_threshold = 1.0471975511965976;
  int max_passes = 500;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

inline SolveResult infomax_solve(const MatrixXd& X, const MatrixXd& W0,
                                 const InfomaxConfig& config) {
  const Index n = X.rows();
  const Index t = X.cols();
  const Index batch = std::min<Index>(std::max<Index>(config.batch_size, 1), t);

  MatrixXd W = W0;
  Rng rng(config.seed);
  std::vector<Index> order(static_cast<std::size_t>(t));
  std::iota(order.begin(), order.end(), Index{0});

  ConvergenceTrace trace;
  Stopwatch watch;
  double alpha = config.alpha0;
  MatrixXd prev_batch_grad;
  bool have_prev = false;
  const double cos_threshold = std::cos(config.angle_threshold);

  // Full-data gradient, recorded once per pass; record 0 is the initial point.
  for (int pass = 0;; ++pass) {
    MatrixXd Y = W * X;
    MatrixXd G = relative_gradient(Y);
    const double grad_inf = G.cwiseAbs().maxCoeff();
    const double loss_value = detail::loss_unchecked(W, Y);
    if (!std::isfinite(loss_value) || !std::isfinite(grad_inf)) {
      throw solver_diverged_error("solver state became non-finite at pass " +
                                      std::to_string(pass),
                                  std::move(trace));
    }

    TraceRecord record;
    record.iter = pass;
    record.time_s = watch.elapsed();
    record.grad_inf = grad_inf;
    record.loss = loss_value;
    record.n2t_products = 1;
    trace.records.push_back(record);

    if (grad_inf <= config.tol || pass >= config.max_passes) break;

    // Seeded Fisher-Yates shuffle; order is re-randomized every pass.
    for (Index i = t - 1; i > 0; --i) {
      const Index j = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    for (Index start = 0; start < t; start += batch) {
      const Index len = std::min(batch, t - start);
      MatrixXd xb(n, len);
      for (Index c = 0; c < len; ++c)
        xb.col(c) = X.col(order[static_cast<std::size_t>(start + c)]);

      const MatrixXd yb = W * xb;
      MatrixXd gb = score(yb) * yb.transpose() / static_cast<double>(len);
      gb.diagonal().array() -= 1.0;

      if (have_prev) {
        const double dot = frobenius_dot(gb, prev_batch_grad);
        const double norms = gb.norm() * prev_batch_grad.norm();
        if (norms > 0.0 && dot < cos_threshold * norms) alpha *= config.anneal;
      }
      W = (MatrixXd::Identity(n, n) - alpha * gb) * W;
      prev_batch_grad = gb;
      have_prev = true;
    }
  }

  MatrixXd Y = W * X;
  return SolveResult{std::move(W), std::move(Y), std::move(trace)};
}

inline SolveResult infomax_solve(const MatrixXd& X, const InfomaxConfig& config = {}) {
  return infomax_solve(X, MatrixXd::Identity(X.rows(), X.rows()), config);
}

}  // namespace ica
