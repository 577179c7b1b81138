#pragma once

#include <optional>

#include "kerrspring/constants.hpp"

namespace kerrspring {

// Fabry-Perot / bow-tie cavity seen by the carrier. All rates are angular
// (rad/s); every other quantity is SI.
struct CavityParams {
  double half_cycle_length = 0.0;          // L [m]
  double carrier_angular_frequency = 0.0;  // omega_0 [rad/s]
  double input_decay = 0.0;                // gamma_in [rad/s]
  double other_loss_decay = 0.0;           // gamma_out [rad/s], excludes SHG loss
  double input_power = 0.0;                // P_0 [W]
  double optomech_coupling = 0.0;          // G [rad/(s m)]

  // gamma' = gamma_in + gamma_out.
  double linear_decay() const { return input_decay + other_loss_decay; }
  // |a_in|^2 = P_0 / (hbar omega_0) [photons/s].
  double input_photon_rate() const;
  // 2 gamma_in |a_in|^2, the right-hand side of the photon-number balance.
  double drive_strength() const;
  // P = (hbar omega_0 c / 2L) n.
  double power_per_photon() const;
};

// G = omega_0 / L, the coupling of a mirror that sets the cavity length.
double standard_coupling(double half_cycle_length, double carrier_angular_frequency);

// Material constants from which the photothermal rates follow.
struct PhotothermalMicroParams {
  double thermal_resistance = 0.0;  // k
  double heat_capacity = 0.0;       // C
  double expansion = 0.0;           // alpha, linear thermal expansion
  double absorption = 0.0;          // alpha', absorption coefficient
  double crystal_length = 0.0;      // L'
};

struct KerrMediumParams {
  double kerr_susceptibility = 0.0;      // chi [rad/s per photon], signed
  double shg_loss = 0.0;                 // beta [rad/s per photon]
  double photothermal_relaxation = 1.0;  // gamma_th [rad/s]
  double photothermal_absorption = 0.0;  // d
  std::optional<PhotothermalMicroParams> micro;

  // Derives gamma_th = 1/(kC) and d = alpha alpha' L'^2 c / (2C).
  static KerrMediumParams from_micro(double kerr_susceptibility, double shg_loss,
                                     const PhotothermalMicroParams& micro);
};

struct MechanicalParams {
  double mass = 0.0;       // m [kg]
  double resonance = 0.0;  // Omega_m [rad/s]
  double damping = 0.0;    // Gamma_m [rad/s]

  static MechanicalParams from_quality_factor(double mass, double resonance,
                                              double quality_factor);
  // Q_m = Omega_m / Gamma_m (Gamma_m is a rate in m x'' = ... - m Gamma_m x').
  double quality_factor() const;
};

struct DerivedRates {
  double linear_decay = 0.0;       // gamma'
  double effective_decay = 0.0;    // gamma = gamma' + beta n
  double finesse = 0.0;            // pi c / (2 L gamma)
  double resonant_power = 0.0;     // (2F/pi)(gamma_in/gamma) P_0
  double input_photon_rate = 0.0;  // P_0 / (hbar omega_0)
};

void validate(const CavityParams& cavity);
void validate(const KerrMediumParams& medium);
void validate(const MechanicalParams& mech);

// Rates at photon number n. The finesse uses the effective decay, so the
// low-power (n -> 0) value is the one a cavity scan measures.
DerivedRates derive_rates(const CavityParams& cavity, const KerrMediumParams& medium,
                          double photon_number);

double finesse(double half_cycle_length, double decay);
// Decay rate that produces the requested finesse.
double decay_for_finesse(double half_cycle_length, double finesse);

// zeta = -2 chi P_0 / (gamma^2 hbar omega_0).
double kerr_gain(double kerr_susceptibility, double input_power, double decay,
                 double carrier_angular_frequency);

// Inverse of kerr_gain with respect to chi.
double susceptibility_for_kerr_gain(double zeta, double input_power, double decay,
                                    double carrier_angular_frequency);

// Kerr gain entering the normalized steady-state cubic of a lossy cavity,
// zeta * gamma_in / gamma'. Equals kerr_gain(...) when gamma_out = 0.
double effective_kerr_gain(const CavityParams& cavity, const KerrMediumParams& medium);

// A = 1 / (1 - zeta/zeta_0). Throws multistability at or beyond threshold.
double amplification_ratio(double zeta);

// Input power at which zeta reaches zeta_0. Throws no_critical_power unless
// chi > 0 (zeta < 0 requires a positive chi).
double critical_power(double kerr_susceptibility, double decay,
                      double carrier_angular_frequency);

}  // namespace kerrspring
