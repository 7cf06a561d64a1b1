#pragma once

#include <chrono>
#include <vector>

namespace ica {

// One row of a solver's convergence history.  `iter` counts accepted
// outer iterations starting at 0; record 0 describes the initial point.
// `time_s` is wall time on a monotonic clock minus any excluded spans
// (oracle step-size searches, truncated-Newton Hessian builds).
// `n2t_products` counts the N x T times T x N matrix products spent in
// this iteration (gradient and curvature moments, Hessian-free products).
// `n_cg` is the conjugate-gradient iteration count; -1 where not applicable.
struct TraceRecord {
  int iter = 0;
  double time_s = 0.0;
  double grad_inf = 0.0;
  double loss = 0.0;
  int ls_tries = 0;
  bool fallback = false;
  long n2t_products = 0;
  int n_cg = -1;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  const TraceRecord& back() const { return records.back(); }
};

// Monotonic wall clock with an exclusion mechanism: spans wrapped in an
// Exclusion guard do not contribute to elapsed().  Exclusions must not
// overlap; elapsed() is nondecreasing across calls made outside guards.
class Stopwatch {
  using clock = std::chrono::steady_clock;

 public:
  Stopwatch() : start_(clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(clock::now() - start_).count() - excluded_;
  }

  class Exclusion {
   public:
    explicit Exclusion(Stopwatch& watch) : watch_(watch), begin_(clock::now()) {}
    ~Exclusion() {
      watch_.excluded_ += std::chrono::duration<double>(clock::now() - begin_).count();
    }
    Exclusion(const Exclusion&) = delete;
    Exclusion& operator=(const Exclusion&) = delete;

   private:
    Stopwatch& watch_;
    clock::time_point begin_;
  };

 private:
  friend class Exclusion;
  clock::time_point start_;
  double excluded_ = 0.0;
};

}  // namespace ica
