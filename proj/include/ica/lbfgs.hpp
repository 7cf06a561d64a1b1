#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

#include "ica/curvature.hpp"
#include "ica/error.hpp"
#include "ica/linesearch.hpp"
#include "ica/model.hpp"
#include "ica/trace.hpp"
#include "ica/types.hpp"

namespace ica {

inline double frobenius_dot(const MatrixXd& a, const MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

// Ring buffer of L-BFGS correction pairs (s_k, y_k) with precomputed
// rho_k = 1 / <s_k|y_k>.  Pairs whose curvature <s|y> falls at or below
// 1e-10 |s| |y| are rejected to keep the implicit metric positive
// definite; pushing beyond capacity evicts the oldest pair.
class LbfgsMemory {
 public:
  struct Pair {
    MatrixXd s;
    MatrixXd y;
    double rho;
  };

  explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

  bool push(MatrixXd s, MatrixXd y) {
    if (capacity_ <= 0) return false;
    const double sy = frobenius_dot(s, y);
    if (!(sy > 1e-10 * s.norm() * y.norm())) return false;
    pairs_.push_back(Pair{std::move(s), std::move(y), 1.0 / sy});
    if (pairs_.size() > static_cast<std::size_t>(capacity_)) pairs_.pop_front();
    return true;
  }

  void clear() { pairs_.clear(); }
  std::size_t size() const { return pairs_.size(); }
  int capacity() const { return capacity_; }
  bool empty() const { return pairs_.empty(); }

  // pairs_[0] is oldest, back() is newest.
  const Pair& operator[](std::size_t i) const { return pairs_[i]; }
  const Pair& newest() const { return pairs_.back(); }

 private:
  int capacity_;
  std::deque<Pair> pairs_;
};

namespace detail {

// Two-loop recursion over matrices under the Frobenius inner product,
// started at q = -G.  The middle step (application of the seed inverse
// Hessian) is injected so the preconditioned and scalar-seeded variants
// share one recursion.
template <typename MiddleFn>
MatrixXd two_loop_core(const MatrixXd& G, const LbfgsMemory& memory, MiddleFn&& middle) {
  MatrixXd q = -G;
  const std::size_t m = memory.size();
  std::vector<double> a(m);
  for (std::size_t k = m; k-- > 0;) {  // newest to oldest
    const auto& pair = memory[k];
    a[k] = pair.rho * frobenius_dot(pair.s, q);
    q -= a[k] * pair.y;
  }
  MatrixXd r = middle(q);
  for (std::size_t k = 0; k < m; ++k) {  // oldest to newest
    const auto& pair = memory[k];
    const double beta = pair.rho * frobenius_dot(pair.y, r);
    r += (a[k] - beta) * pair.s;
  }
  return r;
}

}  // namespace detail

// Search direction from the two-loop recursion seeded with the inverse of
// the regularized block-diagonal approximation.  With empty memory this is
// exactly block_solve(precond, -G); with stored pairs it applies the BFGS
// corrections around that seed.  The result is a descent direction whenever
// precond is positive definite and all stored pairs satisfy the curvature
// condition.
inline MatrixXd two_loop_direction(const MatrixXd& G, const LbfgsMemory& memory,
                                   const BlockDiagApprox& precond) {
  return detail::two_loop_core(G, memory,
                               [&](const MatrixXd& q) { return block_solve(precond, q); });
}

// Shared solver knobs.  Defaults follow the benchmark protocol: memory 7,
// up to 10 backtracking candidates, eigenvalue floor 1e-2, stop when the
// max-norm of the relative gradient reaches 1e-8.
struct SolverConfig {
  int m = 7;
  int n_ls = 10;
  double lambda_min = 1e-2;
  double tol = 1e-8;
  int max_iter = 500;
  PrecondKind precond = PrecondKind::h2;
};

namespace detail {

struct NullObserver {
  void operator()(int /*iter*/, std::size_t /*memory_len*/, bool /*fallback*/) const {}
};

// Seed strategies for the two-loop middle step.

struct PreconditionedSeed {
  PrecondKind kind;
  double lambda_min;
  BlockDiagApprox approx;

  void prepare(const MatrixXd& Y, long& n2t_products) {
    if (kind == PrecondKind::h2) {
      approx = regularize(approx_h2(Y), lambda_min);
      n2t_products += 1;  // H2 moments are one shaped product
    } else {
      approx = regularize(approx_h1(Y), lambda_min);
    }
  }

  MatrixXd middle(const MatrixXd& q, const LbfgsMemory&) const {
    return block_solve(approx, q);
  }
};

// Classical scalar seed gamma = <s|y> / <y|y> from the newest stored pair,
// 1 with empty memory.
struct ScalarSeed {
  void prepare(const MatrixXd&, long&) {}

  MatrixXd middle(const MatrixXd& q, const LbfgsMemory& memory) const {
    if (memory.empty()) return q;
    const auto& last = memory.newest();
    const double gamma = 1.0 / (last.rho * frobenius_dot(last.y, last.y));
    return gamma * q;
  }
};

// Common L-BFGS driver.  Maintains Y = W X through relative updates with a
// consistency refresh every 50 accepted steps, records one trace row per
// outer iteration, and applies the fallback policy: when the line search
// fails along the quasi-Newton direction, the memory is cleared and the
// search is retried along -G; a second failure stops the run.  The
// fallback step's correction pair seeds the fresh memory on the next
// iteration.
template <typename Seed, typename Observer = NullObserver>
SolveResult lbfgs_drive(const MatrixXd& X, const MatrixXd& W0, const SolverConfig& config,
                        Seed seed, Observer observer = Observer{}) {
  constexpr int kRefreshPeriod = 50;

  MatrixXd W = W0;
  MatrixXd Y = W0.isIdentity(0.0) ? X : MatrixXd(W0 * X);
  double current_loss = detail::loss_unchecked(W, Y);
  LbfgsMemory memory(config.m);
  ConvergenceTrace trace;
  Stopwatch watch;

  MatrixXd prev_gradient;
  MatrixXd pending_step;
  bool have_pending = false;
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

    if (have_pending) {
      memory.push(std::move(pending_step), G - prev_gradient);
      have_pending = false;
    }

    seed.prepare(Y, products);
    MatrixXd direction =
        detail::two_loop_core(G, memory, [&](const MatrixXd& q) { return seed.middle(q, memory); });

    LineSearchResult ls = backtracking_line_search(W, Y, direction, current_loss, config.n_ls);
    int tries = ls.tries;
    bool fallback = false;
    if (!ls.success) {
      fallback = true;
      memory.clear();
      direction = -G;
      ls = backtracking_line_search(W, Y, direction, current_loss, config.n_ls);
      tries += ls.tries;
    }

    record.ls_tries = tries;
    record.fallback = fallback;
    record.n2t_products = products;

    if (!ls.success) {
      // No descent along -G within the try budget: the iterate is stalled.
      trace.records.push_back(record);
      observer(iter, memory.size(), fallback);
      break;
    }

    W = std::move(ls.W);
    Y = std::move(ls.Y);
    current_loss = ls.loss;
    pending_step = ls.alpha * direction;
    prev_gradient = std::move(G);
    have_pending = true;

    if (++steps_since_refresh >= kRefreshPeriod) {
      Y = W * X;
      steps_since_refresh = 0;
    }

    trace.records.push_back(record);
    observer(iter, memory.size(), fallback);
  }

  return SolveResult{std::move(W), std::move(Y), std::move(trace)};
}

}  // namespace detail

// Preconditioned L-BFGS solver: the two-loop recursion is seeded with the
// inverse of the regularized sparse Hessian approximation selected by
// config.precond, rebuilt from the current Y every iteration.
template <typename Observer = detail::NullObserver>
SolveResult picard_solve(const MatrixXd& X, const MatrixXd& W0, const SolverConfig& config,
                         Observer observer = Observer{}) {
  detail::PreconditionedSeed seed{config.precond, config.lambda_min, {}};
  return detail::lbfgs_drive(X, W0, config, std::move(seed), std::move(observer));
}

inline SolveResult picard_solve(const MatrixXd& X, const SolverConfig& config = {}) {
  return picard_solve(X, MatrixXd::Identity(X.rows(), X.rows()), config);
}

// Reference L-BFGS with the classical scalar seed; identical driver,
// identical fallback policy, no curvature approximation.
template <typename Observer = detail::NullObserver>
SolveResult vanilla_lbfgs_solve(const MatrixXd& X, const MatrixXd& W0,
                                const SolverConfig& config, Observer observer = Observer{}) {
  return detail::lbfgs_drive(X, W0, config, detail::ScalarSeed{}, std::move(observer));
}

inline SolveResult vanilla_lbfgs_solve(const MatrixXd& X, const SolverConfig& config = {}) {
  return vanilla_lbfgs_solve(X, MatrixXd::Identity(X.rows(), X.rows()), config);
}

}  // namespace ica
