#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kerrspring/core_model.hpp"

namespace kerrspring {

enum class Stability { stable, unstable };

// One self-consistent operating point of the driven Kerr cavity. The
// photothermal/mechanical static displacement is taken to be absorbed in
// the bare detuning.
struct SteadyState {
  double photon_number = 0.0;        // n
  double bare_detuning = 0.0;        // Delta' [rad/s]
  double effective_detuning = 0.0;   // Delta = Delta' - chi n [rad/s]
  double normalized_detuning = 0.0;  // xi = Delta / gamma
  double effective_decay = 0.0;      // gamma = gamma' + beta n [rad/s]
  double intracavity_power = 0.0;    // P = (hbar omega_0 c / 2L) n [W]
  std::complex<double> field;        // a = sqrt(2 gamma_in) a_in / (gamma - i Delta)
  // Eigenvalues of the linearized drift matrix of (delta a, delta a*).
  std::array<std::complex<double>, 2> eigenvalues{};
  Stability stability = Stability::stable;

  bool stable() const { return stability == Stability::stable; }
  // Kerr part of the normalized detuning, -chi n / gamma.
  double kerr_detuning(const KerrMediumParams& medium) const;
};

// Builds the state at photon number n and bare detuning Delta' (no balance
// check) including its linear-stability classification.
SteadyState make_steady_state(const CavityParams& cavity, const KerrMediumParams& medium,
                              double photon_number, double bare_detuning);

// |n[(gamma'+beta n)^2 + (Delta'-chi n)^2] - 2 gamma_in |a_in|^2| / (2 gamma_in |a_in|^2).
double balance_residual(const CavityParams& cavity, const KerrMediumParams& medium,
                        double photon_number, double bare_detuning);

// Coefficients (highest degree first) of the photon-number balance in the
// scaled variable y = n gamma'^2 / (2 gamma_in |a_in|^2).
std::array<double, 4> scaled_balance_coefficients(const CavityParams& cavity,
                                                  const KerrMediumParams& medium,
                                                  double bare_detuning);

// All physical steady states at bare detuning Delta', sorted by photon number.
// Fold-point duplicates (relative separation < 1e-6) are merged.
std::vector<SteadyState> solve_steady_states(const CavityParams& cavity,
                                             const KerrMediumParams& medium,
                                             double bare_detuning);

// The unique steady state whose effective detuning is Delta.
SteadyState steady_state_at_detuning(const CavityParams& cavity,
                                     const KerrMediumParams& medium,
                                     double effective_detuning);

// The unique steady state with normalized detuning xi = Delta / gamma, where
// gamma = gamma' + beta n includes the SHG loss of that state.
SteadyState steady_state_at_normalized_detuning(const CavityParams& cavity,
                                                const KerrMediumParams& medium, double xi);

// Discriminant of the scaled balance cubic; positive iff three distinct real
// roots exist at this bare detuning.
double balance_discriminant(const CavityParams& cavity, const KerrMediumParams& medium,
                            double bare_detuning);

struct MultistabilityProbe {
  bool found = false;                     // three steady states exist at xi0
  double bare_normalized_detuning = 0.0;  // xi0 maximizing the discriminant
  double discriminant = 0.0;
  std::size_t branch_count = 0;           // from solve_steady_states at xi0
};

// Maximizes the discriminant over xi0 in [low, high]: a coarse scan with the
// given step, then golden-section refinement around the best sample. Resolves
// three-root windows far narrower than the scan step.
MultistabilityProbe probe_multistability(const CavityParams& cavity,
                                         const KerrMediumParams& medium, double xi0_low,
                                         double xi0_high, double step);

struct PowerCurvePoint {
  double bare_normalized_detuning = 0.0;  // xi_0 = Delta' / gamma'
  std::vector<SteadyState> branches;
  std::optional<std::string> error;
};

struct PowerCurve {
  double resonant_power = 0.0;  // normalization of P/P_max
  std::vector<PowerCurvePoint> points;

  std::size_t max_branch_count() const;
};

// Sweeps xi_0 = Delta'/gamma'. Solver failures are recorded per point.
PowerCurve power_curve(const CavityParams& cavity, const KerrMediumParams& medium,
                       std::span<const double> bare_normalized_grid, unsigned jobs = 1);

double reflected_power(const CavityParams& cavity, const KerrMediumParams& medium,
                       const SteadyState& state);

struct DetuningEstimate {
  double xi = 0.0;
  // Set when P_scan_max / P_PDH_max deviates from 1 by more than 15 %, where
  // the linear drift model is no longer trustworthy.
  bool drift_model_questionable = false;
};

// Normalized detuning from transmitted powers with the linear power-drift
// correction: xi = sqrt(P_scan_max (1/P_trans - 1/P_PDH_max)).
DetuningEstimate detuning_from_powers(double transmitted_power, double scan_max_power,
                                      double pdh_max_power);

struct ShgDiscriminant {
  double value = 0.0;
  bool amplification_wins = false;  // beta < |chi| / sqrt(3)
};

ShgDiscriminant shg_discriminant(const KerrMediumParams& medium, const CavityParams& cavity,
                                 double photon_number);

// Smallest positive n with D(n) = 0, if any.
std::optional<double> shg_discriminant_root(const KerrMediumParams& medium,
                                            const CavityParams& cavity);

}  // namespace kerrspring
