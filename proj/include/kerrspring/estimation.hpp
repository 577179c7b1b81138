#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kerrspring {

// Lossless Kerr model of the static spring versus normalized detuning:
// k = (16 / 3 sqrt3) k0 xi / ((1 + xi^2)(1 + xi^2 + 2 zeta xi / (1 + xi^2))).
// Throws divergent_spring at the pole.
double model_k_opt(double xi, double zeta, double k_opt_0);

struct SpringPoint {
  double xi = 0.0;
  double k_opt = 0.0;    // [N/m]
  double sigma_k = 0.0;  // [N/m]
};

struct SpringDataset {
  std::vector<SpringPoint> points;
  double input_power = 0.0;  // P_0 [W]
  std::string temperature_label;
};

// Normalized detuning below which the lock-point estimate is unreliable.
inline constexpr double kLowDetuningLimit = 0.3;

struct FitOptions {
  std::size_t bootstrap_samples = 0;  // 0 disables
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct StartDiagnostics {
  double zeta_start = 0.0;
  bool converged = false;
  double cost = 0.0;
  int iterations = 0;
  std::string message;
};

struct FitResult {
  double zeta = 0.0;
  double zeta_err = 0.0;
  double k_opt_0 = 0.0;
  double k_opt_0_err = 0.0;
  std::array<std::array<double, 2>, 2> covariance{};  // (zeta, k_opt_0)
  double chi_squared_reduced = 0.0;
  // NaN when the fitted zeta is at or beyond zeta_0.
  double amplification = 0.0;
  double amplification_err = 0.0;
  bool unphysical_regime = false;
  std::vector<std::size_t> low_detuning_points;  // indices with xi < 0.3
  std::vector<StartDiagnostics> starts;
  std::optional<double> bootstrap_zeta_err;
  std::optional<double> bootstrap_k_opt_0_err;
  double input_power = 0.0;
  std::string temperature_label;
};

// Weighted least squares (weights 1/sigma^2) of model_k_opt over
// (zeta, k_opt_0) with starts at zeta in {0, zeta_0/2, 0.9 zeta_0}.
// Standard errors come from (J^T J)^-1 scaled by the reduced chi-square.
FitResult fit_spring(const SpringDataset& dataset, const FitOptions& options = {});

struct PhotothermalSample {
  double omega = 0.0;  // [rad/s]
  std::complex<double> value;
};

struct PhotothermalFit {
  double omega_th_scale = 0.0;       // omega_th at the shape normalization [rad/s]
  double gamma_th = 0.0;             // [rad/s]
  double gain_normalization = 0.0;   // detector / actuator conversion
  bool fallback_normalization = false;
  bool converged = false;
  double cost = 0.0;
};

// omega_th(Omega) / omega_th_scale; defaults to 1 (valid for Omega << gamma).
using RateShape = std::function<std::complex<double>(double)>;

// Fits g (gamma_th + i Omega) / (w s(Omega) + gamma_th + i Omega) within the band.
// When |w| < gamma_th the gain is instead the mean |H| over 6-7 kHz.
PhotothermalFit fit_photothermal(const std::vector<PhotothermalSample>& samples,
                                 double band_low, double band_high,
                                 const RateShape& shape = {});

struct PowerPoint {
  double input_power = 0.0;  // [W]
  double zeta = 0.0;
  double zeta_err = 0.0;     // 0 means unweighted
};

struct CriticalPowerEstimate {
  double slope = 0.0;  // d zeta / d P_0 [1/W]
  double slope_err = 0.0;
  double critical_power = 0.0;  // zeta_0 / slope [W]
  double critical_power_err = 0.0;
};

std::vector<PowerPoint> to_power_points(const std::vector<FitResult>& fits);

// Weighted fit of zeta = c P_0 and extrapolation to zeta_0.
CriticalPowerEstimate amplification_vs_power(const std::vector<PowerPoint>& points);

struct SyntheticSpringParams {
  double zeta = 0.0;
  double k_opt_0 = 1.0;
  double input_power = 0.0;
  std::string temperature_label;
  std::vector<double> xi;  // detuning grid
};

// Multiplicative Gaussian noise k (1 + noise N(0,1)) with sigma_k =
// max(noise, 1e-3) |k|. Same seed, same dataset on every platform.
SpringDataset synthesize_dataset(const SyntheticSpringParams& params, double noise,
                                 std::uint64_t seed);

// Evenly spaced detuning grid covering [0.35, 2.0].
std::vector<double> default_detuning_grid(std::size_t count);

struct MonteCarloSummary {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double median_abs_zeta_error = 0.0;
  double median_zeta_bias = 0.0;
  double median_rel_k_opt_0_error = 0.0;
  std::vector<double> zeta_estimates;
};

// Per-trial seeds derive from root_seed, so results do not depend on jobs.
MonteCarloSummary monte_carlo_fit(const SyntheticSpringParams& params, double noise,
                                  std::size_t trials, std::uint64_t root_seed, unsigned jobs = 1);

// Stateless 64-bit mixer used to derive independent seeds.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace kerrspring
