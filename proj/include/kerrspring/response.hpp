#pragma once

#include <complex>
#include <span>
#include <vector>

#include "kerrspring/core_model.hpp"
#include "kerrspring/steady_state.hpp"

namespace kerrspring {

using Complex = std::complex<double>;

// Delta / ((gamma + i Omega)^2 + Delta^2 + 2 [beta (gamma + i Omega) - chi Delta] n).
// Shared by the optical spring and the photothermal absorption rate.
// Throws divergent_spring when the denominator vanishes.
Complex spring_kernel(const KerrMediumParams& medium, const SteadyState& state, double omega);

// K_opt(Omega) = 2 hbar G^2 n * kernel [N/m]. Unstable branches produce a
// warning, not an error.
Complex complex_spring_constant(const CavityParams& cavity, const KerrMediumParams& medium,
                                const SteadyState& state, double omega);

// Lossless form in terms of P, xi and xi_K:
// (4 omega_0 P / (L c gamma)) xi / ((1 + i Omega/gamma)^2 + xi^2 + 2 xi xi_K),
// scaled by (G L / omega_0)^2 so that it applies to any coupling G.
// Requires beta = 0.
Complex lossless_spring_constant(const CavityParams& cavity, const KerrMediumParams& medium,
                                 const SteadyState& state, double omega);

// k_opt = K_opt(0) written as
// (4 omega_0 P / (L c)) Delta / (gamma^2 + Delta^2 + 2 gamma gamma_S + 2 Delta Delta_K)
// with gamma_S = beta n and Delta_K = -chi n.
double static_spring_constant(const CavityParams& cavity, const KerrMediumParams& medium,
                              const SteadyState& state);

// omega_th(Omega) = d K_opt(Omega).
Complex photothermal_rate(const CavityParams& cavity, const KerrMediumParams& medium,
                          const SteadyState& state, double omega);

struct PhotothermalTransfer {
  Complex value;
  // The closed form assumes Omega >> gamma_th; set when Omega < gamma_th.
  bool outside_adiabatic_regime = false;
};

// H_th = (gamma_th + i Omega) / (omega_th + gamma_th + i Omega).
PhotothermalTransfer photothermal_transfer(Complex photothermal_rate_value,
                                           double photothermal_relaxation, double omega);

// Sigma_th = H_th K_opt.
Complex self_energy(Complex spring, Complex photothermal_rate_value,
                    double photothermal_relaxation, double omega);

// delta x / delta F_ext = H / (m(-Omega^2 + Omega_m^2 + i Omega Gamma_m) + H k).
// The observable is the cavity length, photothermal displacement included.
Complex effective_susceptibility(const MechanicalParams& mech, Complex spring,
                                 Complex transfer, double omega);
std::vector<Complex> effective_susceptibility(const MechanicalParams& mech,
                                              std::span<const Complex> spring,
                                              std::span<const Complex> transfer,
                                              std::span<const double> omega);

struct CompositeResonance {
  double angular_frequency = 0.0;  // sqrt(Omega_m^2 + Re k / m), 0 when unstable
  bool anti_spring_unstable = false;
  double growth_rate = 0.0;        // sqrt(-(Omega_m^2 + Re k / m)) when unstable
};

CompositeResonance composite_resonance(const MechanicalParams& mech, Complex spring);

// Frequency response sampled on a grid of Omega >= 0.
struct SpringResponse {
  std::vector<double> omega;
  std::vector<Complex> spring;             // K_opt
  std::vector<Complex> photothermal_rate;  // omega_th
  std::vector<Complex> transfer;           // H_th
  std::vector<Complex> self_energy;        // Sigma_th
  std::vector<bool> outside_adiabatic_regime;
  bool from_unstable_branch = false;
};

SpringResponse spring_response(const CavityParams& cavity, const KerrMediumParams& medium,
                               const SteadyState& state, std::span<const double> omega,
                               unsigned jobs = 1);

struct CompositeOscillator {
  MechanicalParams mech;
  double static_spring = 0.0;
  CompositeResonance resonance;
  std::vector<Complex> susceptibility;  // on the SpringResponse grid
};

// Mechanical oscillator loaded by the static spring and screened by H_th.
CompositeOscillator composite_oscillator(const MechanicalParams& mech,
                                         const SpringResponse& response,
                                         double static_spring);

struct BodePoint {
  double magnitude_db = 0.0;
  double phase_deg = 0.0;
};

BodePoint to_bode(Complex value);

std::vector<double> log_grid(double start, double stop, std::size_t count);
std::vector<double> linear_grid(double start, double stop, std::size_t count);

}  // namespace kerrspring
