#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "ica/trace.hpp"

namespace ica {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input matrix failed validation (wrong shape, non-finite entries).
class invalid_data_error : public error {
 public:
  using error::error;
};

// Sample covariance is numerically rank deficient; whitening refused.
class rank_deficiency_error : public error {
 public:
  using error::error;
};

// Loss evaluated to a non-finite value (singular W or overflowing state).
class nonfinite_loss_error : public error {
 public:
  using error::error;
};

// A 2x2 preconditioner block is exactly singular; the approximation was
// not regularized before solving.
class singular_preconditioner_error : public error {
 public:
  using error::error;
};

// Rejection sampler exceeded its attempt budget.
class sampler_stall_error : public error {
 public:
  using error::error;
};

// Malformed matrix file; message carries the line (CSV) or byte offset
// (binary) of the first offending location.
class format_error : public error {
 public:
  using error::error;
};

// Solver state became non-finite.  Carries the partial trace so callers
// can record the run as failed without losing its history.
class solver_diverged_error : public error {
 public:
  solver_diverged_error(const std::string& what, ConvergenceTrace trace)
      : error(what), trace_(std::move(trace)) {}

  const ConvergenceTrace& trace() const { return trace_; }

 private:
  ConvergenceTrace trace_;
};

}  // namespace ica
