// icabench: generate synthetic ICA problems, run solvers on them, and
// compare convergence.  Exit codes: 0 success, 2 data/format error,
// 3 all repeats diverged, 4 invalid flags.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ica/ica.hpp"

namespace {

struct CommonFlags {
  std::string experiment;
  std::string data_path;
  long n = 0;
  long t = 0;
  std::uint64_t seed = 0;
  int repeats = 10;
  std::string out;
  bool sequential = false;
  bool svg = false;

  ica::SolverConfig base;
  std::string precond;
  ica::InfomaxConfig infomax;
  double angle_deg = 60.0;
  ica::TruncatedNewtonConfig tnewton;
  bool no_cg_precond = false;
};

void add_data_flags(CLI::App* cmd, CommonFlags& flags) {
  auto* exp = cmd->add_option("--experiment", flags.experiment, "synthetic experiment A, B or C")
                  ->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}));
  auto* data = cmd->add_option("--data", flags.data_path, "matrix file (.csv or .icab)");
  exp->excludes(data);
  data->excludes(exp);
  cmd->add_option("--n", flags.n, "channel count override")->check(CLI::PositiveNumber);
  cmd->add_option("--t", flags.t, "sample count override")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "base seed; repeat r uses seed+r");
  cmd->add_option("--repeats", flags.repeats, "independent repeats (100 restores the full protocol)")
      ->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--m", flags.base.m, "L-BFGS memory length")->check(CLI::NonNegativeNumber);
  cmd->add_option("--n-ls", flags.base.n_ls, "line-search try budget")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda-min", flags.base.lambda_min, "preconditioner eigenvalue floor");
  cmd->add_option("--tol", flags.base.tol, "gradient max-norm stopping threshold");
  cmd->add_option("--max-iter", flags.base.max_iter, "iteration (or pass) cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--precond", flags.precond, "Hessian approximation: h1 or h2")
      ->check(CLI::IsMember({"h1", "h2"}));
  cmd->add_option("--batch-size", flags.infomax.batch_size, "infomax mini-batch size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha0", flags.infomax.alpha0, "infomax initial step size");
  cmd->add_option("--anneal", flags.infomax.anneal, "infomax step decay factor");
  cmd->add_option("--angle-deg", flags.angle_deg, "infomax annealing angle threshold (degrees)");
  cmd->add_option("--cg-tol", flags.tnewton.cg_tol, "truncated-Newton CG relative residual");
  cmd->add_option("--cg-max-iter", flags.tnewton.cg_max_iter,
                  "truncated-Newton CG iteration cap (0: 10N)");
  cmd->add_flag("--no-cg-precond", flags.no_cg_precond,
                "disable the H2 preconditioner inside truncated-Newton CG");
  cmd->add_flag("--sequential", flags.sequential, "run repeats on one thread");
  cmd->add_flag("--svg", flags.svg, "emit a convergence plot");
}

void check_overrides(long n, long t) {
  if (n > 0 && n < 2) throw CLI::ValidationError("--n must be at least 2");
  if (n > 0 && t > 0 && t < n) throw CLI::ValidationError("--t must be at least --n");
}

ica::BenchDataSpec data_spec(const CommonFlags& flags) {
  ica::BenchDataSpec spec;
  if (!flags.experiment.empty()) spec.experiment = ica::experiment_from_char(flags.experiment[0]);
  spec.data_path = flags.data_path;
  check_overrides(flags.n, flags.t);
  spec.n_override = static_cast<ica::Index>(flags.n);
  spec.t_override = static_cast<ica::Index>(flags.t);
  spec.seed = flags.seed;
  spec.repeats = flags.repeats;
  if (!spec.experiment && spec.data_path.empty()) {
    throw CLI::ValidationError("--experiment or --data is required");
  }
  return spec;
}

ica::SolverSpec solver_spec(const CommonFlags& flags, const std::string& id_name) {
  ica::SolverSpec spec;
  try {
    spec.id = ica::solver_from_string(id_name);
  } catch (const ica::invalid_data_error& e) {
    throw CLI::ValidationError(e.what());
  }
  spec.base = flags.base;
  spec.infomax = flags.infomax;
  spec.infomax.angle_threshold = flags.angle_deg * 3.14159265358979323846 / 180.0;
  spec.tnewton = flags.tnewton;
  spec.tnewton.use_precond = !flags.no_cg_precond;
  if (!flags.precond.empty()) {
    const ica::PrecondKind kind =
        flags.precond == "h1" ? ica::PrecondKind::h1 : ica::PrecondKind::h2;
    spec.base.precond = kind;
    // The h1/h2 solver ids carry the approximation; an explicit flag rewrites them.
    if (spec.id == ica::SolverId::picard_h1 || spec.id == ica::SolverId::picard_h2) {
      spec.id = kind == ica::PrecondKind::h1 ? ica::SolverId::picard_h1 : ica::SolverId::picard_h2;
    } else if (spec.id == ica::SolverId::sqn_h1 || spec.id == ica::SolverId::sqn_h2) {
      spec.id = kind == ica::PrecondKind::h1 ? ica::SolverId::sqn_h1 : ica::SolverId::sqn_h2;
    }
  }
  return spec;
}

int finish(const ica::BenchResult& result, const CommonFlags& flags) {
  bool any_survived = false;
  for (const auto& solver : result.solvers) {
    for (const auto& run : solver.runs) {
      if (!run.diverged) any_survived = true;
    }
  }
  if (flags.svg) {
    const std::string svg = ica::svg_comparison(ica::summary_to_json(result));
    std::ofstream out(std::filesystem::path(flags.out) / "comparison.svg", std::ios::binary);
    out << svg;
  }
  if (!any_survived) {
    std::cerr << "all repeats diverged\n";
    return 3;
  }
  for (const auto& solver : result.solvers) {
    std::cout << ica::to_string(solver.spec.id) << ": " << solver.tol_reached_fraction * 100.0
              << "% of runs reached tol\n";
  }
  std::cout << "wrote " << flags.out << "/summary.json\n";
  return 0;
}

std::vector<std::string> split_csv_list(const std::string& joined) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= joined.size()) {
    const std::size_t comma = joined.find(',', pos);
    parts.push_back(joined.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return parts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximum-likelihood ICA solver benchmarks"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "generate a synthetic problem and save its observations");
  gen->add_option("--experiment", gen_flags.experiment, "A, B or C")
      ->required()
      ->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}));
  gen->add_option("--n", gen_flags.n, "channel count override")->check(CLI::PositiveNumber);
  gen->add_option("--t", gen_flags.t, "sample count override")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_flags.seed, "generator seed");
  gen->add_option("--out", gen_flags.out, "output path, .csv or .icab")->required();

  CommonFlags run_flags;
  std::string run_solver;
  auto* run = app.add_subcommand("run", "benchmark one solver");
  run->add_option("--solver", run_solver,
                  "picard-h1 picard-h2 lbfgs sqn-h1 sqn-h2 tnewton gd-oracle infomax")
      ->required();
  add_data_flags(run, run_flags);
  add_solver_flags(run, run_flags);
  run->add_option("--out", run_flags.out, "output directory")->required();

  CommonFlags cmp_flags;
  std::string cmp_solvers;
  auto* cmp = app.add_subcommand("compare", "benchmark several solvers on shared data");
  cmp->add_option("--solvers", cmp_solvers, "comma-separated solver ids")->required();
  add_data_flags(cmp, cmp_flags);
  add_solver_flags(cmp, cmp_flags);
  cmp->add_option("--out", cmp_flags.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  try {
    if (gen->parsed()) {
      check_overrides(gen_flags.n, gen_flags.t);
      const ica::Experiment experiment = ica::experiment_from_char(gen_flags.experiment[0]);
      const ica::SyntheticProblem problem =
          ica::gen_experiment(experiment, gen_flags.seed, static_cast<ica::Index>(gen_flags.n),
                              static_cast<ica::Index>(gen_flags.t));
      if (const auto dir = std::filesystem::path(gen_flags.out).parent_path(); !dir.empty()) {
        std::filesystem::create_directories(dir);
      }
      ica::save_matrix(problem.X, gen_flags.out);
      std::cout << "wrote " << problem.X.rows() << " x " << problem.X.cols() << " matrix to "
                << gen_flags.out << "\n";
      return 0;
    }
    if (run->parsed()) {
      const auto data = data_spec(run_flags);
      const auto spec = solver_spec(run_flags, run_solver);
      const auto result = ica::run_and_write(data, {spec}, run_flags.out, run_flags.sequential);
      return finish(result, run_flags);
    }
    // compare
    const auto data = data_spec(cmp_flags);
    std::vector<ica::SolverSpec> specs;
    for (const std::string& name : split_csv_list(cmp_solvers)) {
      specs.push_back(solver_spec(cmp_flags, name));
    }
    const auto result = ica::run_and_write(data, specs, cmp_flags.out, cmp_flags.sequential);
    return finish(result, cmp_flags);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ica::format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ica::invalid_data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ica::rank_deficiency_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ica::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
