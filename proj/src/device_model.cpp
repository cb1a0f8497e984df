#include "ferrosyn/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ferrosyn/error.hpp"
#include "ferrosyn/random.hpp"

namespace ferrosyn::device {

namespace {

bool rel_close(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void EnvelopeParams::validate() const {
  if (!(r_min > 0.0) || !(r_max > r_min)) {
    throw Error(ErrorCode::InvalidParameter, "envelope requires r_max > r_min > 0");
  }
  if (!(v0 > 0.0)) throw Error(ErrorCode::InvalidParameter, "envelope requires v0 > 0");
  if (!std::isfinite(v_off)) throw Error(ErrorCode::InvalidParameter, "envelope v_off is not finite");
}

void DeviceRule::validate() const {
  upper.validate();
  lower.validate();
  if (!(upper.v_off < lower.v_off)) {
    throw Error(ErrorCode::InvalidParameter, "upper envelope must be centered left of the lower one");
  }
  if (!(validity_range_volts > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "validity range must be positive");
  }
  if (!(min_pulse_width_seconds >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "minimum pulse width must be non-negative");
  }
}

double DeviceRule::hrs() const { return eval_envelope(lower, validity_range_volts); }

double DeviceRule::lrs() const { return eval_envelope(upper, -validity_range_volts); }

DeviceRule table1_rule() {
  DeviceRule rule;
  rule.lower = {.r_min = 1.1e9, .r_max = 2.5e9, .v0 = 0.60, .v_off = 1.6};
  rule.upper = {.r_min = 1.1e9, .r_max = 2.5e9, .v0 = 0.45, .v_off = -1.0};
  return rule;
}

double eval_envelope(const EnvelopeParams& p, double v) {
  return p.r_off() + p.r_s() * std::tanh((v - p.v_off) / p.v0);
}

DeviceState apply_pulse(const DeviceState& state, const DeviceRule& rule, const PulseSpec& pulse) {
  if (!std::isfinite(pulse.amplitude) || std::abs(pulse.amplitude) > rule.validity_range_volts) {
    throw Error(ErrorCode::OutOfCalibratedRange,
                "amplitude " + std::to_string(pulse.amplitude) + " V outside ±" +
                    std::to_string(rule.validity_range_volts) + " V");
  }
  if (!(pulse.width > 0.0) || pulse.width < rule.min_pulse_width_seconds) {
    throw Error(ErrorCode::PulseTooShort, "width " + std::to_string(pulse.width) +
                                              " s below self-loading limit " +
                                              std::to_string(rule.min_pulse_width_seconds) + " s");
  }
  const double r_lo = std::min(rule.upper.r_min, rule.lower.r_min);
  const double r_hi = std::max(rule.upper.r_max, rule.lower.r_max);
  if (!(state.resistance >= r_lo && state.resistance <= r_hi)) {
    throw Error(ErrorCode::OutOfRange, "state resistance " + std::to_string(state.resistance) +
                                           " Ω outside the envelope bounds");
  }

  const double v = pulse.amplitude;
  if (v < 0.0) {
    const double target = eval_envelope(rule.upper, v);
    if (state.resistance > target) return {target};
  } else if (v > 0.0) {
    const double target = eval_envelope(rule.lower, v);
    if (state.resistance < target) return {target};
  }
  return state;
}

double resistance_to_weight(double r, const DeviceRule& rule) {
  const double r_lo = std::min(rule.upper.r_min, rule.lower.r_min);
  const double r_hi = std::max(rule.upper.r_max, rule.lower.r_max);
  if (!(r >= r_lo && r <= r_hi)) {
    throw Error(ErrorCode::OutOfRange, "resistance " + std::to_string(r) + " Ω outside [r_min, r_max]");
  }
  const double g_min = 1.0 / r_hi;
  const double g_max = 1.0 / r_lo;
  return (1.0 / r - g_min) / (g_max - g_min);
}

double weight_to_resistance(double w, const DeviceRule& rule) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "weight " + std::to_string(w) + " outside [0, 1]");
  }
  const double r_lo = std::min(rule.upper.r_min, rule.lower.r_min);
  const double r_hi = std::max(rule.upper.r_max, rule.lower.r_max);
  const double g_min = 1.0 / r_hi;
  const double g_max = 1.0 / r_lo;
  return std::clamp(1.0 / (g_min + w * (g_max - g_min)), r_lo, r_hi);
}

std::vector<TracePoint> simulate_staircase(const DeviceRule& rule, std::span<const PulseSpec> schedule,
                                           std::optional<DeviceState> initial) {
  if (schedule.empty()) throw Error(ErrorCode::InsufficientData, "empty pulse schedule");
  DeviceState state = initial.value_or(DeviceState{rule.hrs()});
  std::vector<TracePoint> trace;
  trace.reserve(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    DeviceState next;
    try {
      next = apply_pulse(state, rule, schedule[i]);
    } catch (const Error& e) {
      throw ScheduleError(e, i);
    }
    trace.push_back({schedule[i], state.resistance, next.resistance});
    state = next;
  }
  return trace;
}

std::vector<TracePoint> simulate_random_pulses(const DeviceRule& rule, std::size_t n, double v_lo,
                                               double v_hi, std::uint64_t seed, double width,
                                               std::optional<DeviceState> initial) {
  if (n == 0) throw Error(ErrorCode::InsufficientData, "random-pulse sequence needs n >= 1");
  if (!(v_lo < v_hi)) throw Error(ErrorCode::InvalidParameter, "voltage range requires v_lo < v_hi");
  if (std::max(std::abs(v_lo), std::abs(v_hi)) > rule.validity_range_volts) {
    throw Error(ErrorCode::OutOfCalibratedRange, "random-pulse range exceeds the validity range");
  }
  Rng rng(seed);
  std::vector<PulseSpec> schedule(n);
  for (auto& p : schedule) p = {rng.uniform(v_lo, v_hi), width};
  return simulate_staircase(rule, schedule, initial);
}

std::vector<PulseSpec> ltp_ltd_schedule(double v_max, double step, double width) {
  if (!(step > 0.0) || !(v_max > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "staircase requires positive v_max and step");
  }
  std::vector<PulseSpec> schedule;
  const auto n = static_cast<std::size_t>(std::floor(v_max / step + 1e-9));
  for (std::size_t k = 1; k <= n; ++k) schedule.push_back({static_cast<double>(k) * step, width});
  for (std::size_t k = 1; k <= n; ++k) schedule.push_back({-static_cast<double>(k) * step, width});
  return schedule;
}

std::vector<PulseSpec> loop_schedule(double v_max, double v_end, double step, double width) {
  if (!(step > 0.0) || !(v_max > 0.0) || !(v_end < v_max)) {
    throw Error(ErrorCode::InvalidParameter, "loop requires step > 0 and v_end < v_max");
  }
  std::vector<PulseSpec> schedule;
  const auto n_up = static_cast<std::size_t>(std::floor(v_max / step + 1e-9));
  for (std::size_t k = 1; k <= n_up; ++k) schedule.push_back({static_cast<double>(k) * step, width});
  const auto n_down = static_cast<std::size_t>(std::floor((v_max - v_end) / step + 1e-9));
  for (std::size_t k = 1; k <= n_down; ++k) {
    schedule.push_back({v_max - static_cast<double>(k) * step, width});
  }
  return schedule;
}

bool on_envelope(const DeviceRule& rule, double v, double r, double rel_tol) {
  return rel_close(r, eval_envelope(rule.upper, v), rel_tol) ||
         rel_close(r, eval_envelope(rule.lower, v), rel_tol);
}

bool inside_envelope(const DeviceRule& rule, double v, double r, double rel_tol) {
  const double r_lo = std::min(rule.upper.r_min, rule.lower.r_min) * (1.0 - rel_tol);
  const double r_hi = std::max(rule.upper.r_max, rule.lower.r_max) * (1.0 + rel_tol);
  if (r < r_lo || r > r_hi) return false;
  // The negative-polarity side of the loop is closed by f_upper, the positive
  // side by f_lower; below/above them the region is closed by the saturation
  // limits. At V = 0 both constraints apply.
  if (v <= 0.0 && r > eval_envelope(rule.upper, v) * (1.0 + rel_tol)) return false;
  if (v >= 0.0 && r < eval_envelope(rule.lower, v) * (1.0 - rel_tol)) return false;
  return true;
}

}  // namespace ferrosyn::device
