#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>

#include "ica/curvature.hpp"
#include "ica/error.hpp"
#include "ica/lbfgs.hpp"
#include "ica/linesearch.hpp"
#include "ica/model.hpp"
#include "ica/trace.hpp"
#include "ica/types.hpp"

namespace ica {

// Memoryless quasi-Newton baseline: every iteration solves the regularized
// sparse approximation against -G and backtracks along that direction.
// Equivalent to the preconditioned L-BFGS solver with zero stored pairs
// and no gradient fallback.
inline SolveResult simple_qn_solve(const MatrixXd& X, const MatrixXd& W0,
                                   const SolverConfig& config) {
  constexpr int kRefreshPeriod = 50;

  MatrixXd W = W0;
  MatrixXd Y = W0.isIdentity(0.0) ? X : MatrixXd(W0 * X);
  double current_loss = detail::loss_unchecked(W, Y);
  const LbfgsMemory no_memory(0);
  ConvergenceTrace trace;
  Stopwatch watch;
  int steps_since_refresh = 0;

  for (int iter = 0;; ++iter) {
    long products = 1;
    MatrixXd G = relative_gradient(Y);
    const double grad_inf = G.cwiseAbs().maxCoeff();
    if (!std::isfinite(current_loss) || !std::isfinite(grad_inf)) {
      throw solver_diverged_error("solver state became non-finite at iteration " +
                                      std::to_string(iter),
                                  std::move(trace));
    }

    TraceRecord record;
    record.iter = iter;
    record.time_s = watch.elapsed();
    record.grad_inf = grad_inf;
    record.loss = current_loss;
    record.n2t_products = products;

    if (grad_inf <= config.tol || iter >= config.max_iter) {
      trace.records.push_back(record);
      break;
    }

    BlockDiagApprox precond = config.precond == PrecondKind::h2
                                  ? regularize(approx_h2(Y), config.lambda_min)
                                  : regularize(approx_h1(Y), config.lambda_min);
    if (config.precond == PrecondKind::h2) products += 1;
    const MatrixXd direction = two_loop_direction(G, no_memory, precond);

    const LineSearchResult ls =
        backtracking_line_search(W, Y, direction, current_loss, config.n_ls);
    record.ls_tries = ls.tries;
    record.n2t_products = products;

    if (!ls.success) {
      trace.records.push_back(record);
      break;
    }

    W = ls.W;
    Y = ls.Y;
    current_loss = ls.loss;
    if (++steps_since_refresh >= kRefreshPeriod) {
      Y = W * X;
      steps_since_refresh = 0;
    }
    trace.records.push_back(record);
  }

  return SolveResult{std::move(W), std::move(Y), std::move(trace)};
}

inline SolveResult simple_qn_solve(const MatrixXd& X, const SolverConfig& config = {}) {
  return simple_qn_solve(X, MatrixXd::Identity(X.rows(), X.rows()), config);
}

}  // namespace ica
