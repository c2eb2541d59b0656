#pragma once

#include <functional>
#include <span>
#include <vector>

namespace moire {

struct LbfgsOptions {
  double grad_tol = 1e-6;  // on the gradient sup-norm
  int max_iter = 5000;
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
};

enum class LbfgsStatus { Converged, MaxIterations, LineSearchStalled };

struct LbfgsReport {
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
  double f = 0.0;
  double grad_inf = 0.0;
};

/// f(x, grad) returns the objective and writes its gradient.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;
/// out = H0 in, a symmetric positive definite approximation of the inverse Hessian.
using InverseMetric = std::function<void(std::span<const double>, std::span<double>)>;
/// Called after every accepted step with (iteration, f, grad sup-norm).
using IterationHook = std::function<void(int, double, double)>;

/**
 * Limited-memory BFGS with a strong Wolfe line search. `x` holds the start
 * point on entry and the last accepted iterate on return. A non-finite
 * objective or gradient that cannot be recovered by step reduction raises
 * NumericalFailure.
 */
LbfgsReport minimize_lbfgs(const Objective& f, std::vector<double>& x, const LbfgsOptions& opt,
                           const InverseMetric& metric = {}, const IterationHook& hook = {});

}  // namespace moire
