#pragma once

// Maximum-likelihood ICA solvers: preconditioned L-BFGS with sparse
// Hessian approximations, reference baselines, synthetic benchmark
// problems and the benchmark harness.

#include "ica/bench.hpp"
#include "ica/curvature.hpp"
#include "ica/datagen.hpp"
#include "ica/error.hpp"
#include "ica/gradient_descent.hpp"
#include "ica/infomax.hpp"
#include "ica/io.hpp"
#include "ica/lbfgs.hpp"
#include "ica/linesearch.hpp"
#include "ica/model.hpp"
#include "ica/prep.hpp"
#include "ica/rng.hpp"
#include "ica/simple_qn.hpp"
#include "ica/svg.hpp"
#include "ica/trace.hpp"
#include "ica/truncated_newton.hpp"
#include "ica/types.hpp"
