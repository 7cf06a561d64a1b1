// Reference implementations used as test oracles.  Everything here is
// deliberately written the slow, obvious way (scalar loops, long double
// accumulation, dense solves) and shares no code with the library paths
// it checks.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ica/rng.hpp"
#include "ica/types.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Loss from first principles: -log|det W| + (1/T) sum 2 log cosh(y/2),
// accumulated in long double.  The 2 log 2 normalization matches the
// library's convention loss(I, 0) = 0.
inline double naive_loss(const MatrixXd& W, const MatrixXd& Y) {
  const long double det = static_cast<long double>(W.determinant());
  const long double log_abs_det = std::log(std::abs(det));
  long double acc = 0.0L;
  for (Index i = 0; i < Y.rows(); ++i) {
    for (Index j = 0; j < Y.cols(); ++j) {
      const long double y = Y(i, j);
      acc += 2.0L * std::log(std::cosh(y / 2.0L));
    }
  }
  return static_cast<double>(-log_abs_det + acc / static_cast<long double>(Y.cols()));
}

// Directional derivative of the loss in relative coordinates by central
// differences: d/dh loss((I + hE) W) at h = 0.
inline double fd_gradient_dot(const MatrixXd& W, const MatrixXd& Y, const MatrixXd& E,
                              double h) {
  const Index n = W.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const double f_plus = naive_loss((I + h * E) * W, (I + h * E) * Y);
  const double f_minus = naive_loss((I - h * E) * W, (I - h * E) * Y);
  return (f_plus - f_minus) / (2.0 * h);
}

// Quadratic form <E|H|E> by second-order central differences.
inline double fd_quadratic_form(const MatrixXd& W, const MatrixXd& Y, const MatrixXd& E,
                                double h) {
  const Index n = W.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const double f_plus = naive_loss((I + h * E) * W, (I + h * E) * Y);
  const double f_zero = naive_loss(W, Y);
  const double f_minus = naive_loss((I - h * E) * W, (I - h * E) * Y);
  return (f_plus - 2.0 * f_zero + f_minus) / (h * h);
}

// Dense Hessian contraction from scratch: moments by scalar loops, then
// (H M)_ij = M_ji + sum_l E[psi'_i y_j y_l] M_il.
inline MatrixXd dense_hessian_apply(const MatrixXd& Y, const MatrixXd& M) {
  const Index n = Y.rows();
  const Index t = Y.cols();
  MatrixXd out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      long double acc = M(j, i);
      for (Index l = 0; l < n; ++l) {
        long double moment = 0.0L;
        for (Index s = 0; s < t; ++s) {
          const double th = std::tanh(0.5 * Y(i, s));
          moment += 0.5L * (1.0L - static_cast<long double>(th) * th) * Y(j, s) * Y(l, s);
        }
        acc += moment / t * M(i, l);
      }
      out(i, j) = static_cast<double>(acc);
    }
  }
  return out;
}

// Solves the implied block-diagonal operator as one dense N^2 x N^2 linear
// system under row-major vectorization p = i N + j.
inline MatrixXd dense_block_system_solve(const MatrixXd& a, const MatrixXd& G) {
  const Index n = a.rows();
  MatrixXd B = MatrixXd::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      B(i * n + j, i * n + j) = a(i, j);
      if (i != j) B(i * n + j, j * n + i) = 1.0;
    }
  }
  VectorXd g(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i * n + j) = G(i, j);
  const VectorXd x = B.fullPivLu().solve(g);
  MatrixXd out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = x(i * n + j);
  return out;
}

inline double eig_min_2x2(double a, double b) {
  Eigen::Matrix2d block;
  block << a, 1.0, 1.0, b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(block);
  return eig.eigenvalues()(0);
}

// Composite Simpson integration on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int intervals) {
  const int n = intervals % 2 == 0 ? intervals : intervals + 1;
  const double h = (hi - lo) / n;
  long double acc = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) acc += f(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return static_cast<double>(acc * h / 3.0L);
}

// Kolmogorov-Smirnov statistic of a sample against a reference CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max(d, std::abs(f - static_cast<double>(k) / n));
    d = std::max(d, std::abs(f - static_cast<double>(k + 1) / n));
  }
  return d;
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double sample_mean(const std::vector<double>& v) {
  long double acc = 0.0L;
  for (double x : v) acc += x;
  return static_cast<double>(acc / v.size());
}

inline double sample_moment(const std::vector<double>& v, int order) {
  long double acc = 0.0L;
  for (double x : v) acc += std::pow(static_cast<long double>(x), order);
  return static_cast<double>(acc / v.size());
}

// Random test fixtures.

inline MatrixXd random_matrix(Index rows, Index cols, ica::Rng& rng, double scale = 1.0) {
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.gaussian();
  return m;
}

// Well-conditioned random square matrix: I plus a small random perturbation.
inline MatrixXd random_unmixing(Index n, ica::Rng& rng, double spread = 0.3) {
  return MatrixXd::Identity(n, n) + spread / std::sqrt(static_cast<double>(n)) *
                                        random_matrix(n, n, rng);
}

}  // namespace oracle
