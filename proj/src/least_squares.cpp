#include "ferrosyn/least_squares.hpp"

#include <cmath>

#include "ferrosyn/error.hpp"

namespace ferrosyn::fit {

SolverResult damped_gauss_newton(const ResidualFn& fn, Eigen::VectorXd initial, Eigen::Index n_residuals,
                                 const SolverOptions& options) {
  const Eigen::Index n_params = initial.size();
  Eigen::VectorXd r(n_residuals);
  Eigen::MatrixXd jac(n_residuals, n_params);

  SolverResult result;
  result.params = std::move(initial);
  fn(result.params, r, &jac);
  result.cost = 0.5 * r.squaredNorm();

  double lambda = options.initial_damping;
  Eigen::VectorXd trial_r(n_residuals);
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool accepted = false;
    Eigen::VectorXd step;
    // Inner loop raises the damping until the cost decreases.
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < n_params; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      step = a.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = result.params + step;
      fn(trial, trial_r, nullptr);
      const double trial_cost = 0.5 * trial_r.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= result.cost) {
        result.params = trial;
        result.cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-15);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No descent direction left: the current point is a stationary point to
      // working precision.
      result.converged = true;
      break;
    }
    fn(result.params, r, &jac);
    if (step.norm() <= options.step_tolerance * (result.params.norm() + options.step_tolerance)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "line fit needs at least two (x, y) pairs");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300 * n) || sxx <= 1e-24 * n * std::max(mx * mx, 1e-300)) {
    throw Error(ErrorCode::DegenerateFit, "all abscissae are equal");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

}  // namespace ferrosyn::fit
