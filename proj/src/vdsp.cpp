#include "ferrosyn/vdsp.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "ferrosyn/error.hpp"

namespace ferrosyn::vdsp {

void VdspParams::validate() const {
  for (double x : {alpha_p, alpha_d, gamma_p, gamma_d}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::InvalidParameter, "VDSP rates and window exponents must be finite and positive");
    }
  }
  if (!std::isfinite(theta_p) || !std::isfinite(theta_d)) {
    throw Error(ErrorCode::InvalidParameter, "VDSP thresholds must be finite");
  }
}

void ScalingFactors::validate() const {
  if (!(sf_p > 0.0) || !(sf_d > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "scaling factors must be positive");
  }
}

ScalingFactors scaling_for_network_size(int n_outputs) {
  struct Entry {
    int size;
    ScalingFactors sf;
  };
  static constexpr Entry table[] = {
      {10, {1.014, 1.30}}, {50, {1.04, 1.30}}, {100, {1.04, 1.30}}, {200, {1.0725, 1.375}}};
  const Entry* best = &table[0];
  for (const auto& e : table) {
    if (std::abs(e.size - n_outputs) < std::abs(best->size - n_outputs)) best = &e;
  }
  return best->sf;
}

SwitchingRate switching_rate(double v, const VdspParams& p) {
  if (v > p.theta_d) return {std::exp(p.alpha_d * (v - p.theta_d)) - 1.0, Polarity::Depress};
  if (v < p.theta_p) return {std::exp(-p.alpha_p * (v - p.theta_p)) - 1.0, Polarity::Potentiate};
  return {};
}

double window(double w, Polarity polarity, const VdspParams& p) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "weight " + std::to_string(w) + " outside [0, 1]");
  }
  switch (polarity) {
    case Polarity::Potentiate: return std::pow(1.0 - w, p.gamma_p);
    case Polarity::Depress: return std::pow(w, p.gamma_d);
    case Polarity::None: return 0.0;
  }
  return 0.0;
}

double delta_w(double v, double w, const VdspParams& p) {
  const auto rate = switching_rate(v, p);
  const double g = window(w, rate.polarity, p);
  switch (rate.polarity) {
    case Polarity::Potentiate: return rate.magnitude * g;
    case Polarity::Depress: return -rate.magnitude * g;
    case Polarity::None: return 0.0;
  }
  return 0.0;
}

double membrane_delta_w(double v_mem, double w, const VdspParams& p, const ScalingFactors& sf) {
  const double v_d = map_voltage(v_mem, sf.sf_d, p.theta_d);
  if (v_d > p.theta_d) {
    return -(std::exp(p.alpha_d * (v_d - p.theta_d)) - 1.0) * window(w, Polarity::Depress, p);
  }
  const double v_p = map_voltage(v_mem, sf.sf_p, p.theta_p);
  if (v_p < p.theta_p) {
    return (std::exp(-p.alpha_p * (v_p - p.theta_p)) - 1.0) * window(w, Polarity::Potentiate, p);
  }
  return 0.0;
}

}  // namespace ferrosyn::vdsp
