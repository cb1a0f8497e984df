#pragma once

// Compact model of a ferroelectric resistive weight programmed with short
// voltage pulses. The reachable (V_write, R) region is bounded by two tanh
// envelopes; a pulse either snaps the resistance onto one of them or leaves
// it untouched.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ferrosyn::device {

/// One tanh branch: R(V) = R_off + R_s * tanh((V - v_off) / v0) with
/// R_off = (r_max + r_min) / 2 and R_s = (r_max - r_min) / 2.
struct EnvelopeParams {
  double r_min = 0.0;  // Ω
  double r_max = 0.0;  // Ω
  double v0 = 0.0;     // V, steepness
  double v_off = 0.0;  // V, transition center

  double r_off() const { return 0.5 * (r_max + r_min); }
  double r_s() const { return 0.5 * (r_max - r_min); }

  /// Throws InvalidParameter unless r_max > r_min > 0 and v0 > 0.
  void validate() const;

  bool operator==(const EnvelopeParams&) const = default;
};

/// Upper (negative-polarity) and lower (positive-polarity) envelopes plus the
/// operating limits the fit is valid for.
struct DeviceRule {
  EnvelopeParams upper;
  EnvelopeParams lower;
  double validity_range_volts = 3.75;
  double min_pulse_width_seconds = 20e-9;

  void validate() const;

  /// Largest resistance a positive pulse can program within the validity range.
  double hrs() const;
  /// Smallest resistance a negative pulse can program within the validity range.
  double lrs() const;

  bool operator==(const DeviceRule&) const = default;
};

/// Fitted 20 ns rule for the hafnia/zirconia weights (lower: 0.60 V / 1.6 V,
/// upper: 0.45 V / -1.0 V, shared 1.1 GΩ..2.5 GΩ bounds).
DeviceRule table1_rule();

struct DeviceState {
  double resistance = 0.0;  // Ω

  bool operator==(const DeviceState&) const = default;
};

struct PulseSpec {
  double amplitude = 0.0;  // V, applied to the top electrode
  double width = 20e-9;    // s

  bool operator==(const PulseSpec&) const = default;
};

double eval_envelope(const EnvelopeParams& p, double v);

/// Applies one programming pulse and returns the new state.
///   V < 0 and R > f_upper(V)  ->  f_upper(V)
///   V > 0 and R < f_lower(V)  ->  f_lower(V)
///   otherwise                 ->  R
/// Throws OutOfCalibratedRange, PulseTooShort, or OutOfRange (state outside
/// [r_min, r_max]).
DeviceState apply_pulse(const DeviceState& state, const DeviceRule& rule, const PulseSpec& pulse);

/// Normalized conductance: 1 at r_min (LRS), 0 at r_max (HRS).
double resistance_to_weight(double r, const DeviceRule& rule);
double weight_to_resistance(double w, const DeviceRule& rule);

struct TracePoint {
  PulseSpec pulse;
  double r_initial = 0.0;
  double r_final = 0.0;

  double delta_r() const { return r_final - r_initial; }
};

/// Folds apply_pulse over a schedule. The initial state defaults to the rule's
/// HRS. Failures are rethrown as ScheduleError with the offending index.
std::vector<TracePoint> simulate_staircase(const DeviceRule& rule, std::span<const PulseSpec> schedule,
                                           std::optional<DeviceState> initial = std::nullopt);

/// Write-read sequence with i.i.d. uniform amplitudes in [v_lo, v_hi).
std::vector<TracePoint> simulate_random_pulses(const DeviceRule& rule, std::size_t n, double v_lo,
                                               double v_hi, std::uint64_t seed,
                                               double width = 20e-9,
                                               std::optional<DeviceState> initial = std::nullopt);

/// Bipolar LTD/LTP staircase: 0 -> +v_max in `step` increments, then
/// 0 -> -v_max. Each positive pulse raises R, each negative pulse lowers it.
std::vector<PulseSpec> ltp_ltd_schedule(double v_max, double step, double width);

/// Hysteresis loop: 0 -> v_max, then v_max -> v_end in `step` increments.
std::vector<PulseSpec> loop_schedule(double v_max, double v_end, double step, double width);

/// True when r lies on f_upper(v) or f_lower(v) to relative tolerance rel_tol.
bool on_envelope(const DeviceRule& rule, double v, double r, double rel_tol = 1e-9);

/// True when f_lower(v) <= r <= f_upper(v) up to relative tolerance rel_tol.
bool inside_envelope(const DeviceRule& rule, double v, double r, double rel_tol = 1e-9);

}  // namespace ferrosyn::device
