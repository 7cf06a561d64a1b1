#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ica/datagen.hpp"
#include "ica/error.hpp"
#include "ica/gradient_descent.hpp"
#include "ica/infomax.hpp"
#include "ica/io.hpp"
#include "ica/lbfgs.hpp"
#include "ica/prep.hpp"
#include "ica/simple_qn.hpp"
#include "ica/truncated_newton.hpp"
#include "ica/types.hpp"

namespace ica {

enum class SolverId {
  picard_h1,
  picard_h2,
  lbfgs,
  sqn_h1,
  sqn_h2,
  tnewton,
  gd_oracle,
  infomax,
};

inline const char* to_string(SolverId id) {
  switch (id) {
    case SolverId::picard_h1: return "picard-h1";
    case SolverId::picard_h2: return "picard-h2";
    case SolverId::lbfgs: return "lbfgs";
    case SolverId::sqn_h1: return "sqn-h1";
    case SolverId::sqn_h2: return "sqn-h2";
    case SolverId::tnewton: return "tnewton";
    case SolverId::gd_oracle: return "gd-oracle";
    default: return "infomax";
  }
}

inline SolverId solver_from_string(const std::string& name) {
  for (SolverId id : {SolverId::picard_h1, SolverId::picard_h2, SolverId::lbfgs,
                      SolverId::sqn_h1, SolverId::sqn_h2, SolverId::tnewton,
                      SolverId::gd_oracle, SolverId::infomax}) {
    if (name == to_string(id)) return id;
  }
  throw invalid_data_error("unknown solver id '" + name + "'");
}

// Where the benchmark data comes from: a named experiment (regenerated per
// repeat with seed base+r) or a matrix file (shared across repeats).
struct BenchDataSpec {
  std::optional<Experiment> experiment;
  std::string data_path;
  Index n_override = 0;
  Index t_override = 0;
  std::uint64_t seed = 0;
  int repeats = 10;
};

struct SolverSpec {
  SolverId id = SolverId::picard_h2;
  SolverConfig base;
  InfomaxConfig infomax;
  TruncatedNewtonConfig tnewton;
};

struct RunRecord {
  int repeat = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  bool reached_tol = false;
  double recovery = std::numeric_limits<double>::quiet_NaN();
  ConvergenceTrace trace;
};

// Median curves over the non-diverged runs of one solver.  The iteration
// curve is the pointwise median of grad_inf at each iteration index while
// a strict majority of runs is still running (so the median of three
// terminates where the second of three terminates).  The time curve
// resamples every run onto a shared log-spaced grid by carrying the last
// recorded value forward (and the first backward), then takes pointwise
// medians.
struct MedianCurve {
  std::vector<int> iters;
  std::vector<double> grad_iter;
  std::vector<double> time_grid;
  std::vector<double> grad_time;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

inline MedianCurve median_curves(const std::vector<const ConvergenceTrace*>& traces,
                                 int time_points = 200) {
  MedianCurve curve;
  std::size_t alive_required = traces.size() / 2 + 1;  // strict majority
  if (traces.empty()) return curve;

  for (int k = 0;; ++k) {
    std::vector<double> values;
    for (const auto* trace : traces) {
      if (static_cast<std::size_t>(k) < trace->size()) {
        values.push_back(trace->records[static_cast<std::size_t>(k)].grad_inf);
      }
    }
    if (values.size() < alive_required) break;
    curve.iters.push_back(k);
    curve.grad_iter.push_back(detail::median_of(std::move(values)));
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto* trace : traces) {
    if (trace->empty()) continue;
    lo = std::min(lo, trace->records.front().time_s);
    hi = std::max(hi, trace->back().time_s);
  }
  if (!std::isfinite(lo)) return curve;
  lo = std::max(lo, 1e-9);
  hi = std::max(hi, lo * (1.0 + 1e-12));

  for (int k = 0; k < time_points; ++k) {
    const double frac = time_points > 1 ? static_cast<double>(k) / (time_points - 1) : 0.0;
    const double g = lo * std::pow(hi / lo, frac);
    std::vector<double> values;
    for (const auto* trace : traces) {
      if (trace->empty()) continue;
      double value = trace->records.front().grad_inf;
      for (const auto& rec : trace->records) {
        if (rec.time_s <= g) value = rec.grad_inf;
        else break;
      }
      values.push_back(value);
    }
    curve.time_grid.push_back(g);
    curve.grad_time.push_back(detail::median_of(std::move(values)));
  }
  return curve;
}

struct SolverBenchResult {
  SolverSpec spec;
  std::vector<RunRecord> runs;
  MedianCurve median;
  double tol_reached_fraction = 0.0;
};

struct BenchResult {
  BenchDataSpec data;
  Index n = 0;
  Index t = 0;
  std::vector<SolverBenchResult> solvers;
};

namespace detail {

inline SolveResult dispatch_solver(const SolverSpec& spec, const MatrixXd& X,
                                   std::uint64_t run_seed) {
  SolverConfig config = spec.base;
  switch (spec.id) {
    case SolverId::picard_h1:
      config.precond = PrecondKind::h1;
      return picard_solve(X, config);
    case SolverId::picard_h2:
      config.precond = PrecondKind::h2;
      return picard_solve(X, config);
    case SolverId::lbfgs:
      return vanilla_lbfgs_solve(X, config);
    case SolverId::sqn_h1:
      config.precond = PrecondKind::h1;
      return simple_qn_solve(X, config);
    case SolverId::sqn_h2:
      config.precond = PrecondKind::h2;
      return simple_qn_solve(X, config);
    case SolverId::tnewton:
      return truncated_newton_solve(X, config, spec.tnewton);
    case SolverId::gd_oracle:
      return gradient_descent_solve(X, config);
    case SolverId::infomax: {
      InfomaxConfig im = spec.infomax;
      im.seed = run_seed;
      im.tol = config.tol;
      im.max_passes = config.max_iter;
      return infomax_solve(X, im);
    }
  }
  throw invalid_data_error("unhandled solver id");
}

inline int worker_count(int repeats, bool sequential) {
  if (sequential || repeats <= 1) return 1;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 4;
  if (const char* env = std::getenv("ICABENCH_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) workers = std::min(workers, cap);
  }
  return std::min(workers, repeats);
}

}  // namespace detail

// Runs every solver on every repeat.  Experiment repeats regenerate data
// with seed base+r; file data is loaded once and shared.  All solvers in
// one repeat see the identical preprocessed matrix.  Repeats run in
// parallel (capped by ICABENCH_THREADS) unless `sequential`; outputs are
// keyed by repeat index, so scheduling cannot change results, only wall
// times.
inline BenchResult run_benchmark(const BenchDataSpec& data, std::vector<SolverSpec> specs,
                                 bool sequential = false) {
  if (specs.empty()) throw invalid_data_error("no solvers selected");
  if (data.repeats < 1) throw invalid_data_error("repeats must be >= 1");
  if (data.experiment.has_value() == !data.data_path.empty()) {
    throw invalid_data_error("exactly one of experiment / data path must be set");
  }

  BenchResult result;
  result.data = data;
  result.solvers.resize(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    result.solvers[s].spec = specs[s];
    result.solvers[s].runs.resize(static_cast<std::size_t>(data.repeats));
  }

  std::optional<MatrixXd> file_data;
  if (!data.data_path.empty()) file_data = load_matrix(data.data_path);

  std::atomic<int> next_repeat{0};
  const auto run_repeat = [&](int r) {
    const std::uint64_t run_seed = data.seed + static_cast<std::uint64_t>(r);
    MatrixXd raw;
    MatrixXd ground_truth;
    bool have_truth = false;
    if (data.experiment) {
      SyntheticProblem problem =
          gen_experiment(*data.experiment, run_seed, data.n_override, data.t_override);
      raw = std::move(problem.X);
      ground_truth = std::move(problem.A);
      have_truth = true;
    } else {
      raw = *file_data;
    }
    auto [white, transform] = preprocess(DataMatrix::from(std::move(raw)));

    for (std::size_t s = 0; s < specs.size(); ++s) {
      RunRecord& rec = result.solvers[s].runs[static_cast<std::size_t>(r)];
      rec.repeat = r;
      rec.seed = run_seed;
      try {
        SolveResult solved = detail::dispatch_solver(specs[s], white.values(), run_seed);
        rec.trace = std::move(solved.trace);
        rec.reached_tol =
            !rec.trace.empty() && rec.trace.back().grad_inf <= specs[s].base.tol;
        if (have_truth) {
          rec.recovery = recovery_index(solved.W * transform.matrix, ground_truth);
        }
      } catch (const solver_diverged_error& err) {
        rec.diverged = true;
        rec.trace = err.trace();
      }
    }
  };

  const int workers = detail::worker_count(data.repeats, sequential);
  if (workers <= 1) {
    for (int r = 0; r < data.repeats; ++r) run_repeat(r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int r = next_repeat.fetch_add(1);
          if (r >= data.repeats) return;
          run_repeat(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (auto& solver : result.solvers) {
    std::vector<const ConvergenceTrace*> alive;
    int reached = 0;
    for (const auto& run : solver.runs) {
      if (!run.diverged) alive.push_back(&run.trace);
      if (run.reached_tol) ++reached;
    }
    solver.median = median_curves(alive);
    solver.tol_reached_fraction =
        static_cast<double>(reached) / static_cast<double>(solver.runs.size());
  }

  if (data.experiment) {
    Index n = 0, t = 0;
    switch (*data.experiment) {
      case Experiment::a: n = 50; t = 10000; break;
      case Experiment::b: n = 15; t = 10000; break;
      case Experiment::c: n = 40; t = 5000; break;
    }
    result.n = data.n_override > 0 ? data.n_override : n;
    result.t = data.t_override > 0 ? data.t_override : t;
  } else {
    result.n = file_data->rows();
    result.t = file_data->cols();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json config_to_json(const SolverSpec& spec) {
  nlohmann::ordered_json j{
      {"m", spec.base.m},
      {"n_ls", spec.base.n_ls},
      {"lambda_min", spec.base.lambda_min},
      {"tol", spec.base.tol},
      {"max_iter", spec.base.max_iter},
      {"precond", to_string(spec.base.precond)},
  };
  if (spec.id == SolverId::infomax) {
    j["batch_size"] = spec.infomax.batch_size;
    j["alpha0"] = spec.infomax.alpha0;
    j["anneal"] = spec.infomax.anneal;
    j["angle_threshold_rad"] = spec.infomax.angle_threshold;
  }
  if (spec.id == SolverId::tnewton) {
    j["cg_tol"] = spec.tnewton.cg_tol;
    j["cg_max_iter"] = spec.tnewton.cg_max_iter;
    j["cg_precond"] = spec.tnewton.use_precond;
  }
  return j;
}

inline nlohmann::ordered_json trace_to_json(const SolverSpec& spec, const RunRecord& run,
                                            Index n, Index t) {
  nlohmann::ordered_json root;
  root["solver"] = to_string(spec.id);
  root["config"] = config_to_json(spec);
  root["n"] = n;
  root["t"] = t;
  root["seed"] = run.seed;
  root["diverged"] = run.diverged;
  if (std::isfinite(run.recovery)) root["recovery_index"] = run.recovery;
  else root["recovery_index"] = nullptr;
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& rec : run.trace.records) {
    nlohmann::ordered_json r{
        {"iter", rec.iter},           {"time_s", rec.time_s},
        {"grad_inf", rec.grad_inf},   {"loss", rec.loss},
        {"ls_tries", rec.ls_tries},   {"fallback", rec.fallback},
        {"n2t_products", rec.n2t_products},
    };
    if (spec.id == SolverId::tnewton) r["n_cg"] = rec.n_cg;
    records.push_back(std::move(r));
  }
  root["records"] = std::move(records);
  return root;
}

inline nlohmann::ordered_json summary_to_json(const BenchResult& result) {
  nlohmann::ordered_json root;
  root["experiment"] =
      result.data.experiment ? nlohmann::ordered_json(std::string(1, to_char(*result.data.experiment)))
                             : nlohmann::ordered_json(nullptr);
  root["data_path"] = result.data.data_path.empty()
                          ? nlohmann::ordered_json(nullptr)
                          : nlohmann::ordered_json(result.data.data_path);
  root["n"] = result.n;
  root["t"] = result.t;
  root["seed"] = result.data.seed;
  root["repeats"] = result.data.repeats;
  nlohmann::ordered_json solvers = nlohmann::ordered_json::array();
  for (const auto& solver : result.solvers) {
    nlohmann::ordered_json s;
    s["solver"] = to_string(solver.spec.id);
    s["config"] = config_to_json(solver.spec);
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& run : solver.runs) {
      nlohmann::ordered_json r;
      r["repeat"] = run.repeat;
      r["seed"] = run.seed;
      r["diverged"] = run.diverged;
      r["reached_tol"] = run.reached_tol;
      r["iterations"] = run.trace.empty() ? 0 : run.trace.back().iter;
      r["final_grad_inf"] = run.trace.empty() ? nlohmann::ordered_json(nullptr)
                                              : nlohmann::ordered_json(run.trace.back().grad_inf);
      r["final_loss"] = run.trace.empty() ? nlohmann::ordered_json(nullptr)
                                          : nlohmann::ordered_json(run.trace.back().loss);
      r["recovery_index"] = std::isfinite(run.recovery) ? nlohmann::ordered_json(run.recovery)
                                                        : nlohmann::ordered_json(nullptr);
      runs.push_back(std::move(r));
    }
    s["runs"] = std::move(runs);
    s["tol_reached_fraction"] = solver.tol_reached_fraction;
    s["median_iter_curve"] = {{"iter", solver.median.iters},
                              {"grad_inf", solver.median.grad_iter}};
    s["median_time_curve"] = {{"time_s", solver.median.time_grid},
                              {"grad_inf", solver.median.grad_time}};
    solvers.push_back(std::move(s));
  }
  root["solvers"] = std::move(solvers);
  return root;
}

inline std::string combined_csv(const BenchResult& result) {
  std::string out = "solver,repeat,iter,time,grad_norm,loss,n2t_product_count\n";
  char buf[160];
  for (const auto& solver : result.solvers) {
    for (const auto& run : solver.runs) {
      for (const auto& rec : run.trace.records) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.9g,%.17g,%.17g,%ld\n",
                      to_string(solver.spec.id), run.repeat, rec.iter, rec.time_s,
                      rec.grad_inf, rec.loss, rec.n2t_products);
        out += buf;
      }
    }
  }
  return out;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw format_error("short write to '" + path.string() + "'");
}

}  // namespace detail

// Runs the benchmark and writes per-run trace JSONs, summary.json and
// combined.csv into out_dir (created if needed).  Returns the in-memory
// result for callers that keep going (comparison plots, exit codes).
inline BenchResult run_and_write(const BenchDataSpec& data, const std::vector<SolverSpec>& specs,
                                 const std::string& out_dir, bool sequential = false) {
  BenchResult result = run_benchmark(data, specs, sequential);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  for (const auto& solver : result.solvers) {
    for (const auto& run : solver.runs) {
      const std::string name =
          std::string(to_string(solver.spec.id)) + "_run" + std::to_string(run.repeat) + ".json";
      detail::write_text_file(dir / name,
                              trace_to_json(solver.spec, run, result.n, result.t).dump(2) + "\n");
    }
  }
  detail::write_text_file(dir / "summary.json", summary_to_json(result).dump(2) + "\n");
  detail::write_text_file(dir / "combined.csv", combined_csv(result));
  return result;
}

}  // namespace ica
