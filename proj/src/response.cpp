#include "kerrspring/response.hpp"

#include <cmath>
#include <sstream>

#include "kerrspring/errors.hpp"
#include "kerrspring/parallel.hpp"

namespace kerrspring {

namespace {

constexpr double kDenominatorFloor = 1e-300;

void warn_if_unstable(const SteadyState& state) {
  if (!state.stable()) {
    std::ostringstream msg;
    msg << "optical response evaluated on an unstable branch (n = " << state.photon_number
        << ")";
    warn(msg.str());
  }
}

}  // namespace

Complex spring_kernel(const KerrMediumParams& medium, const SteadyState& state,
                      double omega) {
  const Complex g(state.effective_decay, omega);
  const double delta = state.effective_detuning;
  const Complex denom =
      g * g + delta * delta +
      2.0 * (medium.shg_loss * g - medium.kerr_susceptibility * delta) * state.photon_number;
  if (std::abs(denom) < kDenominatorFloor) {
    throw Error(ErrorKind::divergent_spring,
                "optical spring diverges: response denominator vanishes");
  }
  return delta / denom;
}

Complex complex_spring_constant(const CavityParams& cavity, const KerrMediumParams& medium,
                                const SteadyState& state, double omega) {
  warn_if_unstable(state);
  const double g = cavity.optomech_coupling;
  return 2.0 * kHbar * g * g * state.photon_number * spring_kernel(medium, state, omega);
}

Complex lossless_spring_constant(const CavityParams& cavity, const KerrMediumParams& medium,
                                 const SteadyState& state, double omega) {
  if (medium.shg_loss != 0.0) {
    throw Error(ErrorKind::domain, "lossless spring form requires zero SHG loss");
  }
  const double gamma = state.effective_decay;
  const double xi = state.normalized_detuning;
  const double xi_k = state.kerr_detuning(medium);
  const double coupling_ratio =
      cavity.optomech_coupling * cavity.half_cycle_length / cavity.carrier_angular_frequency;
  const double prefactor = 4.0 * cavity.carrier_angular_frequency * state.intracavity_power /
                           (cavity.half_cycle_length * kSpeedOfLight * gamma) *
                           coupling_ratio * coupling_ratio;
  const Complex u(1.0, omega / gamma);
  const Complex denom = u * u + xi * xi + 2.0 * xi * xi_k;
  if (std::abs(denom) < kDenominatorFloor) {
    throw Error(ErrorKind::divergent_spring, "optical spring diverges");
  }
  return prefactor * xi / denom;
}

double static_spring_constant(const CavityParams& cavity, const KerrMediumParams& medium,
                              const SteadyState& state) {
  warn_if_unstable(state);
  const double gamma = state.effective_decay;
  const double delta = state.effective_detuning;
  const double gamma_s = medium.shg_loss * state.photon_number;
  const double delta_k = -medium.kerr_susceptibility * state.photon_number;
  const double denom =
      gamma * gamma + delta * delta + 2.0 * gamma * gamma_s + 2.0 * delta * delta_k;
  if (std::abs(denom) < kDenominatorFloor) {
    throw Error(ErrorKind::divergent_spring, "static optical spring diverges");
  }
  const double coupling_ratio =
      cavity.optomech_coupling * cavity.half_cycle_length / cavity.carrier_angular_frequency;
  return 4.0 * cavity.carrier_angular_frequency * state.intracavity_power /
         (cavity.half_cycle_length * kSpeedOfLight) * coupling_ratio * coupling_ratio *
         delta / denom;
}

Complex photothermal_rate(const CavityParams& cavity, const KerrMediumParams& medium,
                          const SteadyState& state, double omega) {
  const double g = cavity.optomech_coupling;
  return 2.0 * medium.photothermal_absorption * kHbar * g * g * state.photon_number *
         spring_kernel(medium, state, omega);
}

PhotothermalTransfer photothermal_transfer(Complex photothermal_rate_value,
                                           double photothermal_relaxation, double omega) {
  const Complex num(photothermal_relaxation, omega);
  return {num / (photothermal_rate_value + num), omega < photothermal_relaxation};
}

Complex self_energy(Complex spring, Complex photothermal_rate_value,
                    double photothermal_relaxation, double omega) {
  const Complex num(photothermal_relaxation, omega);
  return num / (photothermal_rate_value + num) * spring;
}

Complex effective_susceptibility(const MechanicalParams& mech, Complex spring,
                                 Complex transfer, double omega) {
  const Complex mechanical =
      mech.mass * Complex(mech.resonance * mech.resonance - omega * omega, omega * mech.damping);
  return transfer / (mechanical + transfer * spring);
}

std::vector<Complex> effective_susceptibility(const MechanicalParams& mech,
                                              std::span<const Complex> spring,
                                              std::span<const Complex> transfer,
                                              std::span<const double> omega) {
  validate(mech);
  if (spring.size() != omega.size() || transfer.size() != omega.size()) {
    throw Error(ErrorKind::invalid_parameter, "susceptibility grids are not aligned");
  }
  std::vector<Complex> out(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    out[i] = effective_susceptibility(mech, spring[i], transfer[i], omega[i]);
  }
  return out;
}

CompositeResonance composite_resonance(const MechanicalParams& mech, Complex spring) {
  validate(mech);
  const double radicand = mech.resonance * mech.resonance + spring.real() / mech.mass;
  CompositeResonance out;
  if (radicand >= 0.0) {
    out.angular_frequency = std::sqrt(radicand);
  } else {
    out.anti_spring_unstable = true;
    out.growth_rate = std::sqrt(-radicand);
  }
  return out;
}

SpringResponse spring_response(const CavityParams& cavity, const KerrMediumParams& medium,
                               const SteadyState& state, std::span<const double> omega,
                               unsigned jobs) {
  validate(cavity);
  validate(medium);
  for (double w : omega) {
    require_finite(w, "omega");
    if (w < 0.0) {
      throw Error(ErrorKind::invalid_parameter,
                  "response grids must be non-negative; K(-Omega) = conj K(Omega)");
    }
  }
  warn_if_unstable(state);

  SpringResponse r;
  r.omega.assign(omega.begin(), omega.end());
  const std::size_t n = omega.size();
  r.spring.resize(n);
  r.photothermal_rate.resize(n);
  r.transfer.resize(n);
  r.self_energy.resize(n);
  std::vector<char> outside(n, 0);
  r.from_unstable_branch = !state.stable();

  const double g = cavity.optomech_coupling;
  const double k_scale = 2.0 * kHbar * g * g * state.photon_number;
  const double gamma_th = medium.photothermal_relaxation;
  parallel_for(n, jobs, [&](std::size_t i) {
    const Complex kernel = spring_kernel(medium, state, omega[i]);
    r.spring[i] = k_scale * kernel;
    r.photothermal_rate[i] = medium.photothermal_absorption * r.spring[i];
    const auto h = photothermal_transfer(r.photothermal_rate[i], gamma_th, omega[i]);
    r.transfer[i] = h.value;
    r.self_energy[i] = h.value * r.spring[i];
    outside[i] = h.outside_adiabatic_regime ? 1 : 0;
  });
  r.outside_adiabatic_regime.assign(outside.begin(), outside.end());
  return r;
}

CompositeOscillator composite_oscillator(const MechanicalParams& mech,
                                         const SpringResponse& response,
                                         double static_spring) {
  CompositeOscillator osc;
  osc.mech = mech;
  osc.static_spring = static_spring;
  osc.resonance = composite_resonance(mech, static_spring);
  const std::vector<Complex> spring(response.omega.size(), Complex(static_spring, 0.0));
  osc.susceptibility = effective_susceptibility(mech, spring, response.transfer, response.omega);
  return osc;
}

BodePoint to_bode(Complex value) {
  return {20.0 * std::log10(std::abs(value)), std::arg(value) * 180.0 / kPi};
}

std::vector<double> log_grid(double start, double stop, std::size_t count) {
  if (!(start > 0.0) || !(stop > 0.0) || count == 0) {
    throw Error(ErrorKind::invalid_parameter, "log grid needs positive bounds and count");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const double a = std::log(start);
  const double step = (std::log(stop) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
  out.front() = start;
  out.back() = stop;
  return out;
}

std::vector<double> linear_grid(double start, double stop, std::size_t count) {
  if (count == 0 || !std::isfinite(start) || !std::isfinite(stop)) {
    throw Error(ErrorKind::invalid_parameter, "linear grid needs finite bounds and count");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
  out.back() = stop;
  return out;
}

}  // namespace kerrspring
