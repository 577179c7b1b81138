#include "kerrspring/core_model.hpp"

#include <cmath>
#include <string>

#include "kerrspring/errors.hpp"

namespace kerrspring {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorKind::invalid_parameter, message);
}

bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

double CavityParams::input_photon_rate() const {
  return input_power / (kHbar * carrier_angular_frequency);
}

double CavityParams::drive_strength() const {
  return 2.0 * input_decay * input_photon_rate();
}

double CavityParams::power_per_photon() const {
  return kHbar * carrier_angular_frequency * kSpeedOfLight / (2.0 * half_cycle_length);
}

double standard_coupling(double half_cycle_length, double carrier_angular_frequency) {
  return carrier_angular_frequency / half_cycle_length;
}

KerrMediumParams KerrMediumParams::from_micro(double kerr_susceptibility, double shg_loss,
                                              const PhotothermalMicroParams& micro) {
  KerrMediumParams medium;
  medium.kerr_susceptibility = kerr_susceptibility;
  medium.shg_loss = shg_loss;
  medium.photothermal_relaxation = 1.0 / (micro.thermal_resistance * micro.heat_capacity);
  medium.photothermal_absorption = micro.expansion * micro.absorption *
                                   micro.crystal_length * micro.crystal_length *
                                   kSpeedOfLight / (2.0 * micro.heat_capacity);
  medium.micro = micro;
  validate(medium);
  return medium;
}

MechanicalParams MechanicalParams::from_quality_factor(double mass, double resonance,
                                                       double quality_factor) {
  require(quality_factor > 0.0 && std::isfinite(quality_factor),
          "quality factor must be positive");
  MechanicalParams mech{mass, resonance, resonance / quality_factor};
  validate(mech);
  return mech;
}

double MechanicalParams::quality_factor() const { return resonance / damping; }

void validate(const CavityParams& cavity) {
  require_finite(cavity.half_cycle_length, "half_cycle_length");
  require_finite(cavity.carrier_angular_frequency, "carrier_angular_frequency");
  require_finite(cavity.input_decay, "input_decay");
  require_finite(cavity.other_loss_decay, "other_loss_decay");
  require_finite(cavity.input_power, "input_power");
  require_finite(cavity.optomech_coupling, "optomech_coupling");
  require(cavity.half_cycle_length > 0.0, "half_cycle_length must be > 0");
  require(cavity.carrier_angular_frequency > 0.0, "carrier_angular_frequency must be > 0");
  require(cavity.input_decay > 0.0, "input_decay must be > 0");
  require(cavity.other_loss_decay >= 0.0, "other_loss_decay must be >= 0");
  require(cavity.input_power >= 0.0, "input_power must be >= 0");
  const double f = finesse(cavity.half_cycle_length, cavity.linear_decay());
  require(std::isfinite(f) && f > 0.0, "finesse must be positive and finite");
}

void validate(const KerrMediumParams& medium) {
  require_finite(medium.kerr_susceptibility, "kerr_susceptibility");
  require_finite(medium.shg_loss, "shg_loss");
  require_finite(medium.photothermal_relaxation, "photothermal_relaxation");
  require_finite(medium.photothermal_absorption, "photothermal_absorption");
  require(medium.shg_loss >= 0.0, "shg_loss must be >= 0");
  require(medium.photothermal_relaxation > 0.0, "photothermal_relaxation must be > 0");
  if (medium.micro) {
    const auto& m = *medium.micro;
    const double gamma_th = 1.0 / (m.thermal_resistance * m.heat_capacity);
    const double d = m.expansion * m.absorption * m.crystal_length * m.crystal_length *
                     kSpeedOfLight / (2.0 * m.heat_capacity);
    require(close_relative(gamma_th, medium.photothermal_relaxation, 1e-12),
            "photothermal_relaxation inconsistent with micro parameters");
    require(close_relative(d, medium.photothermal_absorption, 1e-12) ||
                (d == 0.0 && medium.photothermal_absorption == 0.0),
            "photothermal_absorption inconsistent with micro parameters");
  }
}

void validate(const MechanicalParams& mech) {
  require_finite(mech.mass, "mass");
  require_finite(mech.resonance, "resonance");
  require_finite(mech.damping, "damping");
  require(mech.mass > 0.0, "mass must be > 0");
  require(mech.resonance >= 0.0, "resonance must be >= 0");
  require(mech.damping >= 0.0, "damping must be >= 0");
}

double finesse(double half_cycle_length, double decay) {
  return kPi * kSpeedOfLight / (2.0 * half_cycle_length * decay);
}

double decay_for_finesse(double half_cycle_length, double finesse_value) {
  return kPi * kSpeedOfLight / (2.0 * half_cycle_length * finesse_value);
}

DerivedRates derive_rates(const CavityParams& cavity, const KerrMediumParams& medium,
                          double photon_number) {
  validate(cavity);
  validate(medium);
  require_finite(photon_number, "photon_number");
  require(photon_number >= 0.0, "photon_number must be >= 0");

  DerivedRates rates;
  rates.linear_decay = cavity.linear_decay();
  rates.effective_decay = rates.linear_decay + medium.shg_loss * photon_number;
  rates.finesse = finesse(cavity.half_cycle_length, rates.effective_decay);
  rates.resonant_power = 2.0 * rates.finesse / kPi *
                         (cavity.input_decay / rates.effective_decay) * cavity.input_power;
  rates.input_photon_rate = cavity.input_photon_rate();
  return rates;
}

double kerr_gain(double kerr_susceptibility, double input_power, double decay,
                 double carrier_angular_frequency) {
  require_finite(kerr_susceptibility, "kerr_susceptibility");
  require_finite(input_power, "input_power");
  require_finite(decay, "decay");
  if (decay == 0.0) throw Error(ErrorKind::domain, "kerr_gain: decay rate is zero");
  return -2.0 * kerr_susceptibility * input_power /
         (decay * decay * kHbar * carrier_angular_frequency);
}

double susceptibility_for_kerr_gain(double zeta, double input_power, double decay,
                                    double carrier_angular_frequency) {
  if (input_power <= 0.0) {
    throw Error(ErrorKind::domain, "susceptibility_for_kerr_gain: input power must be > 0");
  }
  return -zeta * decay * decay * kHbar * carrier_angular_frequency / (2.0 * input_power);
}

double effective_kerr_gain(const CavityParams& cavity, const KerrMediumParams& medium) {
  const double gamma = cavity.linear_decay();
  return kerr_gain(medium.kerr_susceptibility, cavity.input_power, gamma,
                   cavity.carrier_angular_frequency) *
         cavity.input_decay / gamma;
}

double amplification_ratio(double zeta) {
  require_finite(zeta, "zeta");
  const double x = zeta / kCriticalKerrGain;
  if (x >= 1.0) {
    throw Error(ErrorKind::multistability,
                "amplification ratio undefined at or beyond the multistability threshold");
  }
  return 1.0 / (1.0 - x);
}

double critical_power(double kerr_susceptibility, double decay,
                      double carrier_angular_frequency) {
  require_finite(kerr_susceptibility, "kerr_susceptibility");
  if (kerr_susceptibility <= 0.0) {
    throw Error(ErrorKind::no_critical_power,
                "no critical power: zeta reaches zeta_0 < 0 only for chi > 0");
  }
  return kCriticalKerrGain * decay * decay * kHbar * carrier_angular_frequency /
         (-2.0 * kerr_susceptibility);
}

}  // namespace kerrspring
