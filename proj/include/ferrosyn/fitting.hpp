#pragma once

// Parameter extraction from measurement traces: conduction regimes, Merz
// kinetics, capacitance density, the two tanh switching envelopes and the
// VDSP switching-rate/window constants.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ferrosyn/device_model.hpp"
#include "ferrosyn/device_physics.hpp"
#include "ferrosyn/least_squares.hpp"
#include "ferrosyn/vdsp.hpp"

namespace ferrosyn::fit {

/// Result of any fitter. residual_rms is in the units of the fitted target:
/// natural-log units for the log-linear fits (TFL, Schottky, Merz), ohms for
/// envelopes, weight units for VDSP and F for capacitance.
template <class P>
struct FitReport {
  P parameters{};
  double residual_rms = 0.0;
  std::size_t n_points = 0;
  bool converged = false;
  int iterations = 0;
};

enum class StateLabel { HRS, LRS, Unknown };

struct IvPoint {
  double voltage = 0.0;  // V
  double current = 0.0;  // A
};

struct IvTrace {
  std::vector<IvPoint> points;
  double area = 0.0;  // m^2
  StateLabel state = StateLabel::Unknown;

  /// >= 8 points, strictly monotone voltages, positive area.
  void validate() const;
};

struct PulseRecord {
  double v_write = 0.0;    // V
  double r_initial = 0.0;  // Ω
  double r_final = 0.0;    // Ω

  bool operator==(const PulseRecord&) const = default;
};

struct PulseTrace {
  std::vector<PulseRecord> records;
  void validate() const;
  bool operator==(const PulseTrace&) const = default;
};

PulseTrace to_pulse_trace(std::span<const device::TracePoint> trace);

struct TflFit {
  physics::TflParams params;  // v_tr is the first voltage of the selected range
  double exponent = 0.0;      // fitted power of V; 2 for a trap-filled limit
};

/// Log-log regression of J = I / area against V over V >= v_min.
/// converged is true when the exponent lies in [exponent_lo, exponent_hi].
FitReport<TflFit> fit_tfl(const IvTrace& trace, double v_min, double exponent_lo = 1.8,
                          double exponent_hi = 2.2);

struct SchottkyFit {
  physics::SchottkyParams params;
  double slope = 0.0;      // d ln(J/T^2) / d sqrt(E)
  double intercept = 0.0;  // ln(J/T^2) at E = 0, equals ln(a_eff) - phi_b / (kT/q)
};

/// Regression of ln(|J| / T^2) against sqrt(|V| / d) over the negative-polarity
/// points with |V| >= v_min_abs.
FitReport<SchottkyFit> fit_schottky(const IvTrace& trace, double thickness, double temperature,
                                    double a_eff = physics::constants::richardson_base,
                                    double v_min_abs = 0.14);

struct MerzPoint {
  double width = 0.0;  // s
  double v_max = 0.0;  // V
};

/// ln(width) = ln(t_inf) + e_act * d / V by ordinary least squares.
FitReport<physics::MerzParams> fit_merz(std::span<const MerzPoint> points, double thickness);

struct CapacitancePoint {
  double area = 0.0;         // m^2
  double capacitance = 0.0;  // F
};

/// Capacitance density through the origin, C = c * A.
FitReport<double> fit_capacitance_density(std::span<const CapacitancePoint> points);

struct EnvelopeFitOptions {
  /// |r_final - r_initial| above which a record counts as a switching event.
  /// Defaults to 1% of the observed resistance range.
  std::optional<double> delta_threshold;
  std::size_t min_events_per_branch = 10;
  SolverOptions solver{};
  double validity_range_volts = 3.75;
  double min_pulse_width_seconds = 20e-9;
};

/// Fits both tanh envelopes with shared (r_min, r_max) to the switching events
/// of a pulse trace: negative-polarity events define the upper branch,
/// positive ones the lower branch.
FitReport<device::DeviceRule> fit_envelopes(const PulseTrace& trace, const EnvelopeFitOptions& options = {});

struct VdspSample {
  double v = 0.0;   // V
  double w = 0.0;   // initial weight in [0, 1]
  double dw = 0.0;  // signed weight change
};

struct VdspFitOptions {
  std::size_t min_samples_per_branch = 6;
  SolverOptions solver{};
};

/// Separable fit of the potentiation (dw > 0) and depression (dw < 0)
/// branches. Each branch starts from the best point of a fixed (alpha, theta)
/// grid with gamma solved in log space, then is refined by damped
/// Gauss-Newton.
FitReport<vdsp::VdspParams> fit_vdsp(std::span<const VdspSample> samples, const VdspFitOptions& options = {});

/// Converts a device rule into VDSP-style samples by programming each weight
/// of the grid with each voltage: dw = w(R_final) - w(R_initial).
std::vector<VdspSample> device_vdsp_surface(const device::DeviceRule& rule, std::span<const double> voltages,
                                            std::span<const double> weights, double width = 20e-9);

}  // namespace ferrosyn::fit
