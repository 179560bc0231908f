#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace netreduce {

struct OptimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;  // best value after each iteration
};

struct NelderMeadOptions {
  double initial_step = 0.1;
  double ftol = 1e-12;  // relative spread of simplex values
  double xtol = 1e-9;   // simplex extent, infinity norm
  std::size_t max_iter = 20000;
  std::size_t restarts = 1;  // fresh simplexes around the best point after convergence
  /// Also stop when the best value improved by less than ftol (relative) over this
  /// many iterations per dimension; handles flat, non-identifiable directions.
  std::size_t stall_window = 100;
};

/// Derivative-free minimization (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
OptimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                           const NelderMeadOptions& opts = {});

struct GradientDescentOptions {
  double tol = 1e-12;  // stop when the relative decrease over the last `window` steps falls below this
  std::size_t window = 10;
  std::size_t max_iter = 20000;
  double initial_step = 1.0;
  double armijo = 1e-4;
};

/// Steepest descent with Armijo backtracking from a Barzilai-Borwein trial step;
/// fg returns f and fills the gradient.
OptimizeResult gradient_descent(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
                                const Eigen::VectorXd& x0, const GradientDescentOptions& opts = {});

}  // namespace netreduce
