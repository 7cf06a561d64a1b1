#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "ica/error.hpp"
#include "ica/rng.hpp"
#include "ica/types.hpp"

namespace ica {

enum class Experiment { a, b, c };

inline char to_char(Experiment e) {
  switch (e) {
    case Experiment::a: return 'A';
    case Experiment::b: return 'B';
    default: return 'C';
  }
}

inline Experiment experiment_from_char(char c) {
  switch (c) {
    case 'A': case 'a': return Experiment::a;
    case 'B': case 'b': return Experiment::b;
    case 'C': case 'c': return Experiment::c;
    default:
      throw invalid_data_error(std::string("unknown experiment '") + c + "', expected A, B or C");
  }
}

// A synthetic problem instance: observations X = A S with the ground truth
// kept for recovery scoring.  mixing_regenerations counts how often the
// near-singular guard redrew A.
struct SyntheticProblem {
  MatrixXd X;
  MatrixXd A;
  MatrixXd S;
  int mixing_regenerations = 0;
};

namespace detail {

// Row i of experiment C mixes N(0,1) with weight alpha_i and N(0, 0.1^2)
// with 1 - alpha_i; alpha runs linearly from 1/2 to 1, so the last row is
// pure standard normal.
inline double experiment_c_alpha(Index i, Index n) {
  return n > 1 ? 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
}

inline void fill_sources(Experiment experiment, MatrixXd& S, Rng& rng) {
  const Index n = S.rows();
  const Index t = S.cols();
  switch (experiment) {
    case Experiment::a:
      for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < t; ++c) S(i, c) = rng.laplace();
      break;
    case Experiment::b: {
      // Three near-equal groups in order: Laplace, Gaussian, exp(-|x|^3).
      const Index third = n / 3;
      const Index split1 = third + (n % 3 > 0 ? 1 : 0);
      const Index split2 = split1 + third + (n % 3 > 1 ? 1 : 0);
      for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < t; ++c) {
          if (i < split1)
            S(i, c) = rng.laplace();
          else if (i < split2)
            S(i, c) = rng.gaussian();
          else
            S(i, c) = rng.cube_exp();
        }
      }
      break;
    }
    case Experiment::c:
      for (Index i = 0; i < n; ++i) {
        const double alpha = experiment_c_alpha(i, n);
        for (Index c = 0; c < t; ++c) S(i, c) = rng.gauss_mixture(alpha, 0.1);
      }
      break;
  }
}

}  // namespace detail

// Generates one benchmark instance.  Defaults: A is N=50, T=10000, all
// Laplace; B is N=15, T=10000 with 5 Laplace, 5 Gaussian, 5 cube-exp rows;
// C is N=40, T=5000 Gaussian scale mixtures.  n/t overrides of 0 keep the
// defaults.  The mixing matrix has i.i.d. N(0,1) entries, redrawn while
// |det A| < 1e-8.  All draws come from one seeded stream in a fixed order
// (sources row-major, then mixing matrix column-major per redraw), so a
// seed pins the instance bit for bit.
inline SyntheticProblem gen_experiment(Experiment experiment, std::uint64_t seed,
                                       Index n_override = 0, Index t_override = 0) {
  Index n = 0, t = 0;
  switch (experiment) {
    case Experiment::a: n = 50; t = 10000; break;
    case Experiment::b: n = 15; t = 10000; break;
    case Experiment::c: n = 40; t = 5000; break;
  }
  if (n_override > 0) n = n_override;
  if (t_override > 0) t = t_override;
  if (n < 2 || t < n) {
    throw invalid_data_error("experiment size overrides must satisfy N >= 2, T >= N");
  }

  Rng rng(seed);
  SyntheticProblem problem;
  problem.S.resize(n, t);
  detail::fill_sources(experiment, problem.S, rng);

  problem.A.resize(n, n);
  for (;;) {
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < n; ++r) problem.A(r, c) = rng.gaussian();
    const double det = problem.A.determinant();
    if (std::abs(det) >= 1e-8) break;
    ++problem.mixing_regenerations;
  }

  problem.X = problem.A * problem.S;
  return problem;
}

// Permutation-and-scale-aware separation score of W against the ground
// truth A.  With P = W A and P~ the row-wise (resp. column-wise) rescaling
// to unit maximum absolute value,
//
//   index = [ sum_i (sum_j |P~_ij| - 1) + sum_j (sum_i |P~_ij| - 1) ] / (2N(N-1)),
//
// i.e. the mean per-entry excess mass off the dominant entry of each row
// and column.  Normalized so an all-ones P scores 1 at every N; 0 iff P is
// a scaled permutation; for a good unmixer the index tracks the typical
// spurious-to-dominant coefficient ratio (~1/sqrt(T)) independent of N.
// Requires W and A invertible so no row or column of P vanishes.
inline double recovery_index(const MatrixXd& W, const MatrixXd& A) {
  const MatrixXd P = (W * A).cwiseAbs();
  const Index n = P.rows();
  if (n < 2) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double m = P.row(i).maxCoeff();
    acc += (P.row(i).sum() - m) / m;
  }
  for (Index j = 0; j < n; ++j) {
    const double m = P.col(j).maxCoeff();
    acc += (P.col(j).sum() - m) / m;
  }
  return acc / (2.0 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace ica
