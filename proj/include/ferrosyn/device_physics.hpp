#pragma once

// Closed-form estimators for the metal/ferroelectric/metal stack: conduction
// current density, programming energy, RC self-loading time and Merz
// switching kinetics.

#include <optional>

namespace ferrosyn::physics {

namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;     // C (exact)
inline constexpr double boltzmann = 1.380649e-23;                // J/K (exact)
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m (CODATA 2018)
inline constexpr double richardson_base = 1.2e6;                 // A m^-2 K^-2 (120 A cm^-2 K^-2)
}  // namespace constants

/// Bulk-limited trap-filled-limit regime: J = k_tfl * V^2 for V >= v_tr.
/// k_tfl lumps (8/9) * mobility * permittivity * theta / d^3; the individual
/// factors are not identifiable from J-V data.
struct TflParams {
  double k_tfl = 0.0;  // A m^-2 V^-2
  double v_tr = 0.0;   // V
  void validate() const;
};

/// Electrode-limited Schottky emission for the negative polarity.
struct SchottkyParams {
  double a_eff = constants::richardson_base;  // A m^-2 K^-2, 120 m*/m0 in SI
  double temperature = 300.0;                 // K
  double phi_b = 0.0;                         // eV
  double eps_r = 0.0;
  void validate() const;
};

/// Full conduction model of one resistive state.
struct ConductionModel {
  TflParams tfl;
  SchottkyParams schottky;
  double ohmic_g = 0.0;        // A m^-2 V^-1, sub-threshold quasi-linear regime
  double thickness = 5e-9;     // m
  void validate() const;
};

struct RcParams {
  double r_el = 5e3;                         // Ω, electrode series resistance
  std::optional<double> eps_dev;             // F/m, absolute permittivity of the film
  double d = 5e-9;                           // m
  std::optional<double> cap_per_area;        // F/m^2, measured
  void validate() const;
  /// eps_dev / d, preferring the measured capacitance density. Throws
  /// InvalidParameter when neither is available.
  double capacitance_density() const;
};

struct MerzParams {
  double t_inf = 0.0;  // s
  double e_act = 0.0;  // V/m
  void validate() const;
};

/// Schottky current density magnitude for an electric field (V/m).
double schottky_density(double e_field, const SchottkyParams& p);

/// Signed current density (A/m^2) following the applied polarity:
/// V >= v_tr -> TFL; V <= -v_tr -> -Schottky(|V|/d); otherwise ohmic_g * V.
double current_density(double v, const ConductionModel& m);

/// Magnitude of the density jump at +v_tr and -v_tr where the regimes meet.
struct RegimeJump {
  double at_positive = 0.0;
  double at_negative = 0.0;
};
RegimeJump regime_jump(const ConductionModel& m);

/// Solves the barrier height that makes |J(v)| equal `target_density` for the
/// given field and permittivity (v negative, electrode-limited regime).
double calibrate_barrier(double target_density, double v, const ConductionModel& m);

/// Joule upper bound Q = |J * area * V| * width.
double programming_energy(double v, double width, double area, const ConductionModel& m);

/// tau = (r_dev || r_el) * c_dev.
double tau_rc(double r_dev, double r_el, double c_dev);

/// Area-scaled self-loading time:
///   tau = [V r_el / (V/A + r_el J(V))] * eps_dev / d
/// Throws DegenerateInput when V/A + r_el J(V) has the wrong sign or vanishes.
double tau_area(double v, double area, const RcParams& rc, const ConductionModel& m);

/// t0 = t_inf * exp(e_act / E).
double merz_switching_time(double e_field, const MerzParams& m);

/// Conduction card reproducing J(-3 V) = -2.2e6 A/m^2 on a 5 nm film at
/// 300 K, with eps_r = 25 and m* = m0. The TFL and ohmic coefficients are
/// illustrative values matched at the 140 mV onset.
ConductionModel calibrated_conduction();

}  // namespace ferrosyn::physics
