#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "ica/error.hpp"
#include "ica/trace.hpp"

namespace ica {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// The density family is fixed: p(y) proportional to 1/cosh^2(y/2), the
// standard Infomax model.  The identifier exists so configurations and
// trace headers can name it.
enum class ScoreModel { infomax };

// Which sparse Hessian approximation seeds the quasi-Newton recursion.
enum class PrecondKind { h1, h2 };

inline const char* to_string(PrecondKind kind) {
  return kind == PrecondKind::h1 ? "h1" : "h2";
}

// Validated observation matrix: N channels (rows) by T samples (columns),
// N >= 2, T >= N, all entries finite.  Immutable once constructed.
class DataMatrix {
 public:
  static DataMatrix from(MatrixXd values) {
    if (values.rows() < 2) {
      throw invalid_data_error("data matrix needs at least 2 channels, got " +
                               std::to_string(values.rows()));
    }
    if (values.cols() < values.rows()) {
      throw invalid_data_error("data matrix needs at least as many samples as channels: N=" +
                               std::to_string(values.rows()) + ", T=" +
                               std::to_string(values.cols()));
    }
    if (!values.allFinite()) {
      throw invalid_data_error("data matrix contains non-finite entries");
    }
    return DataMatrix(std::move(values));
  }

  const MatrixXd& values() const { return values_; }
  Index n_channels() const { return values_.rows(); }
  Index n_samples() const { return values_.cols(); }

 private:
  explicit DataMatrix(MatrixXd values) : values_(std::move(values)) {}
  MatrixXd values_;
};

// Terminal state of a solver run: unmixing matrix, source estimate
// Y = W X, and the per-iteration convergence history.
struct SolveResult {
  MatrixXd W;
  MatrixXd Y;
  ConvergenceTrace trace;
};

}  // namespace ica
