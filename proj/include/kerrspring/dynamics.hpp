#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "kerrspring/core_model.hpp"

namespace kerrspring {

// Bare detuning Delta'(t) [rad/s].
using DetuningSchedule = std::function<double(double)>;

struct Discontinuity {
  double time = 0.0;       // 50 % crossing [s]
  double rise_time = 0.0;  // 10-90 % [s]
  double amplitude = 0.0;  // signed power step [W]
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> detuning;  // Delta'(t)
  std::vector<std::complex<double>> field;
  std::vector<double> photon_number;      // |a|^2
  std::vector<double> transmitted_power;  // intracavity power (hbar omega_0 c / 2L) n [W]
  double resonant_power = 0.0;            // P_max at n -> 0
  double charging_time = 0.0;             // tau = 2 pi / gamma'
  std::vector<Discontinuity> discontinuities;
};

struct IntegrationOptions {
  double duration = 0.0;   // [s]
  double time_step = 0.0;  // [s], 0 selects the largest admissible step
  bool include_photothermal = false;
  // Samples are kept every record_interval seconds (0 keeps every step).
  double record_interval = 0.0;
  // Initial photothermal displacement; NaN starts at its equilibrium.
  double initial_displacement = std::numeric_limits<double>::quiet_NaN();
};

// Largest decay rate reachable by the cavity, gamma' + beta n_max with
// n_max = 2 gamma_in |a_in|^2 / gamma'^2.
double max_decay_rate(const CavityParams& cavity, const KerrMediumParams& medium);

// Largest step allowed by the integrator, 0.01 * 2 pi / gamma_max.
double max_time_step(const CavityParams& cavity, const KerrMediumParams& medium);

// Field amplitude on resonance in the linear cavity:
// a_max = sqrt(2 gamma_in) a_in / gamma', with a_in = sqrt(P_0 / (hbar omega_0)).
// The drive term gamma a_max of the normalized field equation equals
// sqrt(2 gamma_in) a_in.
double resonant_amplitude(const CavityParams& cavity);

// Fixed-step RK4 for
//   da/dt = [i(Delta' + G x) - i chi n - gamma' - beta n] a + sqrt(2 gamma_in) a_in
// optionally coupled to dx/dt = -gamma_th x + d hbar G n.
Trajectory integrate_field(const CavityParams& cavity, const KerrMediumParams& medium,
                           const DetuningSchedule& schedule, std::complex<double> initial_field,
                           const IntegrationOptions& options);

enum class ScanDirection { upward, downward };

// Upward scans move Delta' from detuning_low to detuning_high (cavity
// lengthening in the sign convention of the field equation).
struct ScanConfig {
  ScanDirection direction = ScanDirection::upward;
  double detuning_low = 0.0;   // [rad/s]
  double detuning_high = 0.0;  // [rad/s]
  double scan_rate = 0.0;      // |dDelta'/dt| [rad/s^2]
  double time_step = 0.0;      // [s], 0 selects the largest admissible step
  bool include_photothermal = false;
  double record_interval = 0.0;
  double jump_threshold = 0.3;  // fraction of P_max for detect_jumps
};

// Scan rate that covers the window in `charging_times` multiples of tau.
double scan_rate_for(const CavityParams& cavity, double detuning_low, double detuning_high,
                     double charging_times);

// Linear ramp starting from the lowest-power stable steady state at the
// starting detuning. Discontinuities are filled in.
Trajectory scan(const CavityParams& cavity, const KerrMediumParams& medium,
                const ScanConfig& config);

struct HysteresisResult {
  Trajectory up;
  Trajectory down;
  bool hysteretic = false;
  double max_difference = 0.0;  // max |P_up - P_down| over the window [W]
  double loop_area = 0.0;       // integral of |P_up - P_down| dDelta' [W rad/s]
};

// Runs the upward and the downward scan (one config of each direction over
// the same window); hysteretic when the curves differ by more than 5 % of P_max
// anywhere in the window.
HysteresisResult hysteresis_scan(const CavityParams& cavity, const KerrMediumParams& medium,
                                 const ScanConfig& upward, const ScanConfig& downward);

// Power steps exceeding threshold * P_max within a 10 tau window, in time order.
std::vector<Discontinuity> detect_jumps(const Trajectory& trajectory, double threshold);

}  // namespace kerrspring
