#pragma once

// Voltage-dependent synaptic plasticity: the weight change is the product of
// a voltage-driven switching rate and a state-dependent window,
//   dw = f(v) * g(w).

namespace ferrosyn::vdsp {

struct VdspParams {
  double alpha_p = 0.67;  // 1/V
  double alpha_d = 0.38;  // 1/V
  double theta_p = 0.55;  // V
  double theta_d = 0.47;  // V
  double gamma_p = 1.62;
  double gamma_d = 1.79;

  void validate() const;
  bool operator==(const VdspParams&) const = default;
};

/// Gains that turn a normalized membrane potential into a programming voltage.
struct ScalingFactors {
  double sf_p = 1.0;
  double sf_d = 1.0;

  void validate() const;
  bool operator==(const ScalingFactors&) const = default;
};

/// Grid-searched gains per output-layer size (10 / 50 / 100 / 200 neurons).
/// Other sizes take the entry of the nearest tabulated size.
ScalingFactors scaling_for_network_size(int n_outputs);

enum class Polarity { None, Potentiate, Depress };

struct SwitchingRate {
  double magnitude = 0.0;
  Polarity polarity = Polarity::None;
};

/// Switching-rate function. Depression takes precedence where the two branch
/// conditions overlap (theta_d < v < theta_p for the fitted constants):
///   v > theta_d                   -> Depress,    e^{alpha_d (v - theta_d)} - 1
///   v <= theta_d and v < theta_p  -> Potentiate, e^{-alpha_p (v - theta_p)} - 1
/// When theta_d >= theta_p the band [theta_p, theta_d] switches nothing.
SwitchingRate switching_rate(double v, const VdspParams& p);

/// Window g(w): (1 - w)^gamma_p when potentiating, w^gamma_d when depressing.
/// Throws OutOfRange for w outside [0, 1].
double window(double w, Polarity polarity, const VdspParams& p);

/// Signed weight change. The caller clips w + dw to [0, 1].
double delta_w(double v, double w, const VdspParams& p);

/// V_prog = v_mem * sf * theta.
inline double map_voltage(double v_mem, double sf, double theta) { return v_mem * sf * theta; }

/// Full synapse update driven by a membrane potential: each branch maps the
/// potential with its own gain and threshold (sf_d * theta_d for depression,
/// sf_p * theta_p for potentiation) and the same precedence as switching_rate.
double membrane_delta_w(double v_mem, double w, const VdspParams& p, const ScalingFactors& sf);

}  // namespace ferrosyn::vdsp
