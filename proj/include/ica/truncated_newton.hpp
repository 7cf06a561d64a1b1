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

struct TruncatedNewtonConfig {
  double cg_tol = 1e-2;  // relative residual target
  int cg_max_iter = 0;   // 0 means 10 N
  bool use_precond = true;
  Index hessian_cap = FullHessian::kDefaultCap;
};

namespace detail {

struct CgOutcome {
  MatrixXd direction;
  int n_iter = 0;        // Hessian-free products spent
  bool breakdown = false;
};

// Preconditioned conjugate gradient on (H + lambda I) p = -G with the
// Hessian applied matrix-free.  Stops at relative residual cg_tol or after
// max_iter products; non-positive curvature aborts with the current
// iterate (breakdown).  A zero gradient returns the zero direction with
// no products spent.
inline CgOutcome tn_conjugate_gradient(const MatrixXd& Y, const MatrixXd& G, double lambda,
                                       const BlockDiagApprox* precond, double cg_tol,
                                       int max_iter, long& n2t_products) {
  CgOutcome outcome;
  const Index n = G.rows();
  outcome.direction = MatrixXd::Zero(n, n);
  const double b_norm = G.norm();
  if (b_norm == 0.0) return outcome;

  MatrixXd r = -G;
  MatrixXd z = precond ? block_solve(*precond, r) : r;
  MatrixXd d = z;
  double rz = frobenius_dot(r, z);

  for (int k = 0; k < max_iter; ++k) {
    MatrixXd hd = hessian_free_product(Y, d);
    n2t_products += 1;
    outcome.n_iter = k + 1;
    if (lambda != 0.0) hd += lambda * d;
    const double curvature = frobenius_dot(d, hd);
    if (!(curvature > 0.0)) {
      outcome.breakdown = true;
      return outcome;
    }
    const double step = rz / curvature;
    outcome.direction += step * d;
    r -= step * hd;
    if (r.norm() <= cg_tol * b_norm) return outcome;
    z = precond ? block_solve(*precond, r) : r;
    const double rz_next = frobenius_dot(r, z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  return outcome;
}

}  // namespace detail

// Truncated-Newton baseline.  Each iteration solves the Newton system
// approximately by conjugate gradient on the Hessian-free product, after a
// spectral regularization step: the exact Hessian is built dense, its
// smallest eigenvalue lambda_m is computed, and lambda = -2 lambda_m is
// added to the operator when lambda_m < 0.  The dense build is an
// oracle-style safeguard, so its wall time is excluded from the trace and
// its cost from the product counter.  CG is optionally preconditioned by
// the regularized H2 block approximation.
inline SolveResult truncated_newton_solve(const MatrixXd& X, const MatrixXd& W0,
                                          const SolverConfig& config,
                                          const TruncatedNewtonConfig& tn = {}) {
  const Index n = X.rows();
  const int cg_cap = tn.cg_max_iter > 0 ? tn.cg_max_iter : static_cast<int>(10 * n);

  MatrixXd W = W0;
  MatrixXd Y = W0.isIdentity(0.0) ? X : MatrixXd(W0 * X);
  double current_loss = detail::loss_unchecked(W, Y);
  ConvergenceTrace trace;
  Stopwatch watch;

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
    record.n_cg = 0;

    if (grad_inf <= config.tol || iter >= config.max_iter) {
      trace.records.push_back(record);
      break;
    }

    double lambda = 0.0;
    {
      Stopwatch::Exclusion oracle(watch);
      const double lambda_m = FullHessian::compute(Y, tn.hessian_cap).min_eigenvalue();
      if (lambda_m < 0.0) lambda = -2.0 * lambda_m;
    }

    BlockDiagApprox precond;
    if (tn.use_precond) {
      precond = regularize(approx_h2(Y), config.lambda_min);
      products += 1;
    }

    detail::CgOutcome cg =
        detail::tn_conjugate_gradient(Y, G, lambda, tn.use_precond ? &precond : nullptr,
                                      tn.cg_tol, cg_cap, products);
    record.n_cg = cg.n_iter;
    record.fallback = cg.breakdown;

    const LineSearchResult ls =
        backtracking_line_search(W, Y, cg.direction, current_loss, config.n_ls);
    record.ls_tries = ls.tries;
    record.n2t_products = products;

    if (!ls.success) {
      trace.records.push_back(record);
      break;
    }

    W = ls.W;
    Y = ls.Y;
    current_loss = ls.loss;
    trace.records.push_back(record);
  }

  return SolveResult{std::move(W), std::move(Y), std::move(trace)};
}

inline SolveResult truncated_newton_solve(const MatrixXd& X, const SolverConfig& config = {},
                                          const TruncatedNewtonConfig& tn = {}) {
  return truncated_newton_solve(X, MatrixXd::Identity(X.rows(), X.rows()), config, tn);
}

}  // namespace ica
