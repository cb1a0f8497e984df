#include "ferrosyn/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ferrosyn/error.hpp"

namespace ferrosyn::fit {

namespace {

using physics::constants::boltzmann;
using physics::constants::elementary_charge;
using physics::constants::vacuum_permittivity;

double rms(double sum_sq, std::size_t n) { return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n)); }

}  // namespace

void IvTrace::validate() const {
  if (points.size() < 8) {
    throw Error(ErrorCode::InsufficientData, "I-V trace needs at least 8 points, got " +
                                                 std::to_string(points.size()));
  }
  if (!(area > 0.0)) throw Error(ErrorCode::InvalidParameter, "I-V trace area must be positive");
  const bool increasing = points[1].voltage > points[0].voltage;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dv = points[i].voltage - points[i - 1].voltage;
    if (increasing ? !(dv > 0.0) : !(dv < 0.0)) {
      throw Error(ErrorCode::InvalidParameter,
                  "I-V voltages must be strictly monotone (row " + std::to_string(i) + ")");
    }
  }
}

void PulseTrace::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.r_initial > 0.0) || !(r.r_final > 0.0) || !std::isfinite(r.v_write)) {
      throw Error(ErrorCode::InvalidParameter, "pulse record " + std::to_string(i) +
                                                   " needs positive resistances and a finite voltage");
    }
  }
}

PulseTrace to_pulse_trace(std::span<const device::TracePoint> trace) {
  PulseTrace out;
  out.records.reserve(trace.size());
  for (const auto& p : trace) out.records.push_back({p.pulse.amplitude, p.r_initial, p.r_final});
  return out;
}

FitReport<TflFit> fit_tfl(const IvTrace& trace, double v_min, double exponent_lo, double exponent_hi) {
  trace.validate();
  std::vector<double> lx, ly;
  double v_start = std::numeric_limits<double>::infinity();
  for (const auto& p : trace.points) {
    if (p.voltage < v_min || p.voltage <= 0.0) continue;
    const double j = p.current / trace.area;
    if (!(j > 0.0)) {
      throw Error(ErrorCode::NonPositiveCurrent,
                  "non-positive current at V = " + std::to_string(p.voltage) + " V in the TFL range");
    }
    lx.push_back(std::log(p.voltage));
    ly.push_back(std::log(j));
    v_start = std::min(v_start, p.voltage);
  }
  if (lx.size() < 5) {
    throw Error(ErrorCode::InsufficientData, "TFL fit needs at least 5 points with V >= v_min");
  }
  const LineFit line = fit_line(lx, ly);

  FitReport<TflFit> report;
  report.parameters.exponent = line.slope;
  report.parameters.params.k_tfl = std::exp(line.intercept);
  report.parameters.params.v_tr = v_start;
  report.residual_rms = line.residual_rms;
  report.n_points = lx.size();
  report.converged = line.slope >= exponent_lo && line.slope <= exponent_hi;
  return report;
}

FitReport<SchottkyFit> fit_schottky(const IvTrace& trace, double thickness, double temperature, double a_eff,
                                    double v_min_abs) {
  trace.validate();
  if (!(thickness > 0.0) || !(temperature > 0.0) || !(a_eff > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "thickness, temperature and a_eff must be positive");
  }
  std::vector<double> sx, sy;
  double v_lo = std::numeric_limits<double>::infinity(), v_hi = 0.0;
  for (const auto& p : trace.points) {
    if (!(p.voltage < 0.0) || -p.voltage < v_min_abs) continue;
    const double j = std::abs(p.current) / trace.area;
    if (!(j > 0.0)) {
      throw Error(ErrorCode::NonPositiveCurrent,
                  "zero current at V = " + std::to_string(p.voltage) + " V in the Schottky range");
    }
    const double v = -p.voltage;
    sx.push_back(std::sqrt(v / thickness));
    sy.push_back(std::log(j / (temperature * temperature)));
    v_lo = std::min(v_lo, v);
    v_hi = std::max(v_hi, v);
  }
  if (sx.size() < 5) throw Error(ErrorCode::InsufficientData, "Schottky fit needs at least 5 negative-bias points");
  if (v_hi < 3.0 * v_lo) {
    throw Error(ErrorCode::InsufficientData, "Schottky fit needs |V| to span at least a factor of 3");
  }
  const LineFit line = fit_line(sx, sy);
  if (!(line.slope > 0.0)) {
    throw Error(ErrorCode::NegativeDiscriminant, "ln(J/T^2) does not grow with sqrt(E); no barrier lowering");
  }
  const double vt = boltzmann * temperature / elementary_charge;
  // slope = sqrt(q / (4 pi eps_r eps0)) / vt
  const double root = line.slope * vt;
  FitReport<SchottkyFit> report;
  auto& params = report.parameters.params;
  params.a_eff = a_eff;
  params.temperature = temperature;
  params.eps_r = elementary_charge / (4.0 * std::numbers::pi * vacuum_permittivity * root * root);
  params.phi_b = (std::log(a_eff) - line.intercept) * vt;
  report.parameters.slope = line.slope;
  report.parameters.intercept = line.intercept;
  report.residual_rms = line.residual_rms;
  report.n_points = sx.size();
  report.converged = params.phi_b > 0.0 && std::isfinite(params.eps_r);
  return report;
}

FitReport<physics::MerzParams> fit_merz(std::span<const MerzPoint> points, double thickness) {
  if (points.size() < 2) throw Error(ErrorCode::InsufficientData, "Merz fit needs at least 2 points");
  if (!(thickness > 0.0)) throw Error(ErrorCode::InvalidParameter, "thickness must be positive");
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!(p.width > 0.0) || !(p.v_max > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "Merz points need positive width and amplitude");
    }
    x.push_back(thickness / p.v_max);
    y.push_back(std::log(p.width));
  }
  const LineFit line = fit_line(x, y);
  FitReport<physics::MerzParams> report;
  report.parameters = {.t_inf = std::exp(line.intercept), .e_act = line.slope};
  report.residual_rms = line.residual_rms;
  report.n_points = points.size();
  report.converged = line.slope > 0.0;
  return report;
}

FitReport<double> fit_capacitance_density(std::span<const CapacitancePoint> points) {
  if (points.empty()) throw Error(ErrorCode::InsufficientData, "capacitance fit needs data");
  double saa = 0.0, sac = 0.0;
  for (const auto& p : points) {
    if (!(p.area > 0.0) || !(p.capacitance > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "capacitance points need positive area and capacitance");
    }
    saa += p.area * p.area;
    sac += p.area * p.capacitance;
  }
  FitReport<double> report;
  report.parameters = sac / saa;
  double ss = 0.0;
  for (const auto& p : points) {
    const double e = p.capacitance - report.parameters * p.area;
    ss += e * e;
  }
  report.residual_rms = rms(ss, points.size());
  report.n_points = points.size();
  report.converged = true;
  return report;
}

// ---------------------------------------------------------------------------
// Envelopes

namespace {

struct BranchPoint {
  double v;
  double r;
};

// Voltage at which a rising branch crosses `level`, by linear interpolation
// between the bracketing samples (sorted by voltage). Falls back to the
// sample closest to the level.
double crossing_voltage(const std::vector<BranchPoint>& pts, double level) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = pts[i - 1];
    const auto& b = pts[i];
    if ((a.r - level) * (b.r - level) <= 0.0 && a.r != b.r) {
      return a.v + (level - a.r) * (b.v - a.v) / (b.r - a.r);
    }
  }
  const auto it = std::min_element(pts.begin(), pts.end(), [level](const auto& x, const auto& y) {
    return std::abs(x.r - level) < std::abs(y.r - level);
  });
  return it->v;
}

struct BranchGuess {
  double v0;
  double v_off;
};

BranchGuess guess_branch(std::vector<BranchPoint> pts, double r_lo, double r_hi) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.v < b.v; });
  const double span = r_hi - r_lo;
  const double v_mid = crossing_voltage(pts, r_lo + 0.5 * span);
  const double v25 = crossing_voltage(pts, r_lo + 0.25 * span);
  const double v75 = crossing_voltage(pts, r_lo + 0.75 * span);
  // tanh reaches 25% / 75% of its range at -/+ atanh(0.5) * v0.
  double v0 = (v75 - v25) / (2.0 * std::atanh(0.5));
  if (!(v0 > 1e-3)) v0 = 0.5;
  return {v0, v_mid};
}

// Value and partial derivatives of the tanh branch with respect to
// (r_min, r_max, v0, v_off).
struct BranchEval {
  double f;
  double d_rmin, d_rmax, d_v0, d_voff;
};

BranchEval eval_branch(double v, double r_min, double r_max, double v0, double v_off) {
  const double t = std::tanh((v - v_off) / v0);
  const double rs = 0.5 * (r_max - r_min);
  const double sech2 = 1.0 - t * t;
  return {0.5 * (r_max + r_min) + rs * t, 0.5 * (1.0 - t), 0.5 * (1.0 + t),
          -rs * sech2 * (v - v_off) / (v0 * v0), -rs * sech2 / v0};
}

}  // namespace

FitReport<device::DeviceRule> fit_envelopes(const PulseTrace& trace, const EnvelopeFitOptions& options) {
  trace.validate();
  if (trace.records.empty()) throw Error(ErrorCode::InsufficientSwitchingEvents, "empty pulse trace");

  double r_obs_lo = std::numeric_limits<double>::infinity();
  double r_obs_hi = 0.0;
  for (const auto& rec : trace.records) {
    r_obs_lo = std::min({r_obs_lo, rec.r_initial, rec.r_final});
    r_obs_hi = std::max({r_obs_hi, rec.r_initial, rec.r_final});
  }
  const double threshold = options.delta_threshold.value_or(0.01 * (r_obs_hi - r_obs_lo));

  std::vector<BranchPoint> upper, lower;
  for (const auto& rec : trace.records) {
    if (!(std::abs(rec.r_final - rec.r_initial) > threshold)) continue;
    if (rec.v_write < 0.0) upper.push_back({rec.v_write, rec.r_final});
    if (rec.v_write > 0.0) lower.push_back({rec.v_write, rec.r_final});
  }
  if (upper.size() < options.min_events_per_branch || lower.size() < options.min_events_per_branch) {
    throw Error(ErrorCode::InsufficientSwitchingEvents,
                "need " + std::to_string(options.min_events_per_branch) +
                    " switching events per polarity, got " + std::to_string(upper.size()) + " negative / " +
                    std::to_string(lower.size()) + " positive");
  }

  double r_sel_lo = std::numeric_limits<double>::infinity(), r_sel_hi = 0.0;
  for (const auto* branch : {&upper, &lower}) {
    for (const auto& p : *branch) {
      r_sel_lo = std::min(r_sel_lo, p.r);
      r_sel_hi = std::max(r_sel_hi, p.r);
    }
  }
  if (!(r_sel_hi > r_sel_lo)) {
    throw Error(ErrorCode::InsufficientSwitchingEvents, "switching events span no resistance range");
  }

  // Work in units of the largest observed resistance so all parameters are O(1).
  const double scale = r_obs_hi;
  const BranchGuess gu = guess_branch(upper, r_sel_lo, r_sel_hi);
  const BranchGuess gl = guess_branch(lower, r_sel_lo, r_sel_hi);
  Eigen::VectorXd p0(6);
  p0 << r_sel_lo / scale, r_sel_hi / scale, gu.v0, gu.v_off, gl.v0, gl.v_off;

  const auto n_up = static_cast<Eigen::Index>(upper.size());
  const auto n_res = n_up + static_cast<Eigen::Index>(lower.size());
  const ResidualFn residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    if (jac) jac->setZero();
    for (Eigen::Index i = 0; i < n_res; ++i) {
      const bool is_up = i < n_up;
      const auto& pt = is_up ? upper[static_cast<std::size_t>(i)] : lower[static_cast<std::size_t>(i - n_up)];
      const Eigen::Index off = is_up ? 2 : 4;
      const BranchEval e = eval_branch(pt.v, p(0), p(1), p(off), p(off + 1));
      r(i) = e.f - pt.r / scale;
      if (jac) {
        (*jac)(i, 0) = e.d_rmin;
        (*jac)(i, 1) = e.d_rmax;
        (*jac)(i, off) = e.d_v0;
        (*jac)(i, off + 1) = e.d_voff;
      }
    }
  };
  const SolverResult solved = damped_gauss_newton(residuals, p0, n_res, options.solver);
  const auto& p = solved.params;

  FitReport<device::DeviceRule> report;
  auto& rule = report.parameters;
  rule.upper = {.r_min = p(0) * scale, .r_max = p(1) * scale, .v0 = p(2), .v_off = p(3)};
  rule.lower = {.r_min = p(0) * scale, .r_max = p(1) * scale, .v0 = p(4), .v_off = p(5)};
  rule.validity_range_volts = options.validity_range_volts;
  rule.min_pulse_width_seconds = options.min_pulse_width_seconds;
  report.residual_rms = std::sqrt(2.0 * solved.cost / static_cast<double>(n_res)) * scale;
  report.n_points = static_cast<std::size_t>(n_res);
  report.iterations = solved.iterations;
  report.converged = solved.converged;
  try {
    rule.validate();
  } catch (const Error&) {
    report.converged = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// VDSP

namespace {

enum class Branch { Potentiate, Depress };

struct BranchSample {
  double v;
  double w;
  double mag;  // |dw|
};

// Rate and window for one branch; the sign of dw is handled by the caller.
double branch_rate(Branch b, double alpha, double theta, double v) {
  return b == Branch::Potentiate ? std::exp(-alpha * (v - theta)) - 1.0 : std::exp(alpha * (v - theta)) - 1.0;
}

double window_base(Branch b, double w) { return b == Branch::Potentiate ? 1.0 - w : w; }

struct BranchFit {
  double alpha, theta, gamma;
  double sum_sq;
  int iterations;
  bool converged;
};

BranchFit fit_vdsp_branch(Branch branch, const std::vector<BranchSample>& s, const SolverOptions& solver) {
  double v_lo = std::numeric_limits<double>::infinity(), v_hi = -v_lo;
  for (const auto& x : s) {
    v_lo = std::min(v_lo, x.v);
    v_hi = std::max(v_hi, x.v);
  }
  const double span = std::max(v_hi - v_lo, 0.1);

  // Grid initialization. theta must lie beyond every sample on the side where
  // the rate vanishes; gamma comes from a through-origin regression of
  // ln(|dw| / f) on ln(window base).
  constexpr int n_alpha = 48;
  constexpr int n_theta = 64;
  double best_cost = std::numeric_limits<double>::infinity();
  BranchFit best{1.0, branch == Branch::Potentiate ? v_hi + 0.1 : v_lo - 0.1, 1.0, 0.0, 0, false};
  for (int ia = 0; ia < n_alpha; ++ia) {
    const double alpha = 0.02 * std::pow(500.0, static_cast<double>(ia) / (n_alpha - 1));
    for (int it = 0; it < n_theta; ++it) {
      const double offset = 1e-3 + span * static_cast<double>(it) / (n_theta - 1);
      const double theta = branch == Branch::Potentiate ? v_hi + offset : v_lo - offset;
      double sxy = 0.0, sxx = 0.0;
      for (const auto& x : s) {
        const double f = branch_rate(branch, alpha, theta, x.v);
        const double lx = std::log(window_base(branch, x.w));
        sxy += lx * (std::log(x.mag) - std::log(f));
        sxx += lx * lx;
      }
      const double gamma = sxx > 0.0 ? std::clamp(sxy / sxx, 0.05, 10.0) : 1.0;
      double cost = 0.0;
      for (const auto& x : s) {
        const double e = branch_rate(branch, alpha, theta, x.v) * std::pow(window_base(branch, x.w), gamma) - x.mag;
        cost += e * e;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = {alpha, theta, gamma, cost, 0, false};
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(s.size());
  const ResidualFn residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double alpha = p(0), theta = p(1), gamma = p(2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& x = s[static_cast<std::size_t>(i)];
      const double sgn = branch == Branch::Potentiate ? -1.0 : 1.0;
      const double ex = std::exp(sgn * alpha * (x.v - theta));
      const double base = window_base(branch, x.w);
      const double g = std::pow(base, gamma);
      r(i) = (ex - 1.0) * g - x.mag;
      if (jac) {
        (*jac)(i, 0) = sgn * (x.v - theta) * ex * g;
        (*jac)(i, 1) = -sgn * alpha * ex * g;
        (*jac)(i, 2) = (ex - 1.0) * g * std::log(base);
      }
    }
  };
  Eigen::VectorXd p0(3);
  p0 << best.alpha, best.theta, best.gamma;
  const SolverResult solved = damped_gauss_newton(residuals, p0, n, solver);
  return {solved.params(0), solved.params(1), solved.params(2), 2.0 * solved.cost, solved.iterations,
          solved.converged};
}

}  // namespace

FitReport<vdsp::VdspParams> fit_vdsp(std::span<const VdspSample> samples, const VdspFitOptions& options) {
  std::vector<BranchSample> pot, dep;
  for (const auto& x : samples) {
    if (!std::isfinite(x.v) || !std::isfinite(x.w) || !std::isfinite(x.dw)) {
      throw Error(ErrorCode::NonFinite, "non-finite VDSP sample");
    }
    if (x.dw > 0.0 && x.w >= 0.0 && x.w < 1.0) pot.push_back({x.v, x.w, x.dw});
    if (x.dw < 0.0 && x.w > 0.0 && x.w <= 1.0) dep.push_back({x.v, x.w, -x.dw});
  }
  if (pot.size() < options.min_samples_per_branch || dep.size() < options.min_samples_per_branch) {
    throw Error(ErrorCode::InsufficientData,
                "VDSP fit needs switching samples of both signs (" + std::to_string(pot.size()) +
                    " potentiating, " + std::to_string(dep.size()) + " depressing)");
  }
  const BranchFit p = fit_vdsp_branch(Branch::Potentiate, pot, options.solver);
  const BranchFit d = fit_vdsp_branch(Branch::Depress, dep, options.solver);

  FitReport<vdsp::VdspParams> report;
  report.parameters = {.alpha_p = p.alpha, .alpha_d = d.alpha, .theta_p = p.theta, .theta_d = d.theta,
                       .gamma_p = p.gamma, .gamma_d = d.gamma};
  report.n_points = pot.size() + dep.size();
  report.residual_rms = rms(p.sum_sq + d.sum_sq, report.n_points);
  report.iterations = p.iterations + d.iterations;
  report.converged = p.converged && d.converged;
  try {
    report.parameters.validate();
  } catch (const Error&) {
    report.converged = false;
  }
  return report;
}

std::vector<VdspSample> device_vdsp_surface(const device::DeviceRule& rule, std::span<const double> voltages,
                                            std::span<const double> weights, double width) {
  std::vector<VdspSample> out;
  out.reserve(voltages.size() * weights.size());
  for (double v : voltages) {
    for (double w : weights) {
      const device::DeviceState s{device::weight_to_resistance(w, rule)};
      const auto next = device::apply_pulse(s, rule, {v, width});
      const double w_final = std::clamp(device::resistance_to_weight(next.resistance, rule), 0.0, 1.0);
      out.push_back({v, w, w_final - w});
    }
  }
  return out;
}

}  // namespace ferrosyn::fit
