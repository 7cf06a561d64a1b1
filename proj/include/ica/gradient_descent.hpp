#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>

#include "ica/error.hpp"
#include "ica/lbfgs.hpp"
#include "ica/model.hpp"
#include "ica/trace.hpp"
#include "ica/types.hpp"

namespace ica {

namespace detail {

// Golden-section minimization of phi over (0, hi], run to an absolute
// bracket width of `width_tol`.  phi must be unimodal-ish; the caller
// guards against non-decrease separately.  Returns the best evaluated
// point, not just the bracket midpoint.
template <typename Phi>
std::pair<double, double> golden_section_min(Phi&& phi, double hi, double width_tol,
                                             int* evals) {
  const double inv_phi = 0.6180339887498948482;  // 1/golden ratio
  double a = 0.0, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  int n = 2;
  double best_x = f1 <= f2 ? x1 : x2;
  double best_f = f1 <= f2 ? f1 : f2;
  while (b - a > width_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = phi(x2);
    }
    ++n;
    if (f1 < best_f) best_f = f1, best_x = x1;
    if (f2 < best_f) best_f = f2, best_x = x2;
  }
  if (evals) *evals += n;
  return {best_x, best_f};
}

}  // namespace detail

// Steepest-descent oracle: every iteration steps along -G with the step
// size chosen by golden-section search over (0, 4] to 1e-3 bracket width.
// The 1-D search runs on precomputed G W and G Y, and its wall time is
// excluded from the trace so the method is timed as if the best step were
// known in advance.  Descent is enforced: if the search returns a
// non-decreasing step it is halved until the loss strictly decreases, and
// the run stops if no such step exists.
inline SolveResult gradient_descent_solve(const MatrixXd& X, const MatrixXd& W0,
                                          const SolverConfig& config) {
  constexpr double kAlphaHi = 4.0;
  constexpr double kWidthTol = 1e-3;
  constexpr int kMaxHalvings = 60;

  MatrixXd W = W0;
  MatrixXd Y = W0.isIdentity(0.0) ? X : MatrixXd(W0 * X);
  double current_loss = detail::loss_unchecked(W, Y);
  ConvergenceTrace trace;
  Stopwatch watch;

  for (int iter = 0;; ++iter) {
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
    record.n2t_products = 1;

    if (grad_inf <= config.tol || iter >= config.max_iter) {
      trace.records.push_back(record);
      break;
    }

    const MatrixXd gw = G * W;
    const MatrixXd gy = G * Y;
    const auto phi = [&](double alpha) {
      return detail::loss_unchecked(W - alpha * gw, Y - alpha * gy);
    };

    double alpha = 0.0;
    int evals = 0;
    {
      Stopwatch::Exclusion oracle(watch);
      auto [best_alpha, best_loss] = detail::golden_section_min(phi, kAlphaHi, kWidthTol, &evals);
      alpha = best_alpha;
      if (!(best_loss < current_loss)) {
        for (int k = 0; k < kMaxHalvings; ++k) {
          alpha *= 0.5;
          ++evals;
          const double cand = phi(alpha);
          if (std::isfinite(cand) && cand < current_loss) break;
          if (k == kMaxHalvings - 1) alpha = 0.0;
        }
      }
    }
    record.ls_tries = evals;

    if (alpha == 0.0) {
      trace.records.push_back(record);
      break;
    }

    W -= alpha * gw;
    Y -= alpha * gy;
    current_loss = detail::loss_unchecked(W, Y);
    trace.records.push_back(record);
  }

  return SolveResult{std::move(W), std::move(Y), std::move(trace)};
}

inline SolveResult gradient_descent_solve(const MatrixXd& X, const SolverConfig& config = {}) {
  return gradient_descent_solve(X, MatrixXd::Identity(X.rows(), X.rows()), config);
}

}  // namespace ica
