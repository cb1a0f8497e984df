#include "ferrosyn/device_physics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ferrosyn/error.hpp"

namespace ferrosyn::physics {

namespace {

using namespace constants;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidParameter, std::string(what) + " must be finite and > 0");
  }
}

double thermal_voltage(double temperature) { return boltzmann * temperature / elementary_charge; }

// Barrier lowering sqrt(qE / (4 pi eps_r eps0)) in volts.
double barrier_lowering(double e_field, double eps_r) {
  return std::sqrt(elementary_charge * e_field /
                   (4.0 * std::numbers::pi * eps_r * vacuum_permittivity));
}

}  // namespace

void TflParams::validate() const {
  require_positive(k_tfl, "k_tfl");
  require_positive(v_tr, "v_tr");
}

void SchottkyParams::validate() const {
  require_positive(a_eff, "a_eff");
  require_positive(temperature, "temperature");
  require_positive(phi_b, "phi_b");
  require_positive(eps_r, "eps_r");
}

void ConductionModel::validate() const {
  tfl.validate();
  schottky.validate();
  if (!(ohmic_g >= 0.0)) throw Error(ErrorCode::InvalidParameter, "ohmic_g must be >= 0");
  require_positive(thickness, "thickness");
}

void RcParams::validate() const {
  require_positive(r_el, "r_el");
  require_positive(d, "d");
  if (eps_dev) require_positive(*eps_dev, "eps_dev");
  if (cap_per_area) require_positive(*cap_per_area, "cap_per_area");
  if (eps_dev && cap_per_area) {
    const double from_eps = *eps_dev / d;
    if (std::abs(from_eps - *cap_per_area) > 0.05 * *cap_per_area) {
      throw Error(ErrorCode::InvalidParameter,
                  "cap_per_area disagrees with eps_dev / d by more than 5%");
    }
  }
}

double RcParams::capacitance_density() const {
  if (cap_per_area) return *cap_per_area;
  if (eps_dev) return *eps_dev / d;
  throw Error(ErrorCode::InvalidParameter,
              "no capacitance density: supply eps_dev or a measured cap_per_area");
}

void MerzParams::validate() const {
  require_positive(t_inf, "t_inf");
  require_positive(e_act, "e_act");
}

double schottky_density(double e_field, const SchottkyParams& p) {
  const double vt = thermal_voltage(p.temperature);
  const double exponent = -(p.phi_b - barrier_lowering(e_field, p.eps_r)) / vt;
  return p.a_eff * p.temperature * p.temperature * std::exp(exponent);
}

double current_density(double v, const ConductionModel& m) {
  if (v >= m.tfl.v_tr) return m.tfl.k_tfl * v * v;
  if (v <= -m.tfl.v_tr) return -schottky_density(-v / m.thickness, m.schottky);
  return m.ohmic_g * v;
}

RegimeJump regime_jump(const ConductionModel& m) {
  const double vt = m.tfl.v_tr;
  return {std::abs(m.tfl.k_tfl * vt * vt - m.ohmic_g * vt),
          std::abs(schottky_density(vt / m.thickness, m.schottky) - m.ohmic_g * vt)};
}

double calibrate_barrier(double target_density, double v, const ConductionModel& m) {
  require_positive(target_density, "target density");
  if (!(v < 0.0)) throw Error(ErrorCode::InvalidParameter, "barrier calibration needs a negative bias");
  const auto& s = m.schottky;
  const double e_field = -v / m.thickness;
  return barrier_lowering(e_field, s.eps_r) -
         thermal_voltage(s.temperature) * std::log(target_density / (s.a_eff * s.temperature * s.temperature));
}

double programming_energy(double v, double width, double area, const ConductionModel& m) {
  require_positive(width, "pulse width");
  require_positive(area, "area");
  return std::abs(current_density(v, m) * area * v) * width;
}

double tau_rc(double r_dev, double r_el, double c_dev) {
  require_positive(r_dev, "r_dev");
  require_positive(r_el, "r_el");
  require_positive(c_dev, "c_dev");
  return r_dev * r_el / (r_dev + r_el) * c_dev;
}

double tau_area(double v, double area, const RcParams& rc, const ConductionModel& m) {
  require_positive(area, "area");
  const double j = current_density(v, m);
  const double denom = v / area + rc.r_el * j;
  // For either polarity V and J share a sign, so the ratio is positive; a
  // vanishing or sign-flipped denominator has no RC interpretation.
  if (v == 0.0 || !(v * denom > 0.0)) {
    throw Error(ErrorCode::DegenerateInput, "V/A + r_el*J must be non-zero with the sign of V");
  }
  return v * rc.r_el / denom * rc.capacitance_density();
}

double merz_switching_time(double e_field, const MerzParams& m) {
  require_positive(e_field, "electric field");
  return m.t_inf * std::exp(m.e_act / e_field);
}

ConductionModel calibrated_conduction() {
  ConductionModel m;
  m.thickness = 5e-9;
  m.schottky.a_eff = constants::richardson_base;
  m.schottky.temperature = 300.0;
  m.schottky.eps_r = 25.0;
  m.schottky.phi_b = 1.0;  // placeholder, solved below
  m.schottky.phi_b = calibrate_barrier(2.2e6, -3.0, m);
  // LRS read of a 1.1 GΩ weight over 24 µm^2, matched to the TFL branch at 140 mV.
  m.ohmic_g = 1.0 / (1.1e9 * 24e-12);
  m.tfl.v_tr = 0.14;
  m.tfl.k_tfl = m.ohmic_g / m.tfl.v_tr;
  return m;
}

}  // namespace ferrosyn::physics
