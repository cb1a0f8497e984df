#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace ferrosyn::fit {

struct SolverOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-8;  // relative to the parameter norm
  double initial_damping = 1e-3;
};

struct SolverResult {
  Eigen::VectorXd params;
  double cost = 0.0;  // 0.5 * |r|^2 at params
  int iterations = 0;
  bool converged = false;
};

/// Fills the residual vector and, when the pointer is non-null, the Jacobian
/// d r_i / d p_j.
using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                                      Eigen::MatrixXd* jacobian)>;

/// Damped Gauss-Newton with Marquardt diagonal scaling. Returns the best
/// parameters seen; `converged` is false when the iteration budget ran out.
SolverResult damped_gauss_newton(const ResidualFn& fn, Eigen::VectorXd initial, Eigen::Index n_residuals,
                                 const SolverOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. Throws DegenerateFit when
/// every x is equal and InsufficientData for fewer than two points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace ferrosyn::fit
