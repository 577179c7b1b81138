#include "kerrspring/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kerrspring/errors.hpp"
#include "kerrspring/parallel.hpp"
#include "kerrspring/polynomial.hpp"

namespace kerrspring {

namespace {

constexpr double kResidualTolerance = 1e-9;
constexpr double kMergeTolerance = 1e-6;

// f(y) and f'(y) of the scaled cubic, in extended precision for polishing.
struct ScaledCubic {
  long double c3, c2, c1, c0;

  long double value(long double y) const { return ((c3 * y + c2) * y + c1) * y + c0; }
  long double slope(long double y) const { return (3.0L * c3 * y + 2.0L * c2) * y + c1; }
};

double polish(const ScaledCubic& f, double y0) {
  long double y = y0;
  long double best = y;
  long double best_residual = std::fabs(f.value(y));
  for (int iter = 0; iter < 60; ++iter) {
    const long double d = f.slope(y);
    if (d == 0.0L) break;
    const long double step = f.value(y) / d;
    y -= step;
    const long double r = std::fabs(f.value(y));
    if (r < best_residual) {
      best_residual = r;
      best = y;
    }
    if (std::fabs(step) <= 1e-18L * std::fabs(y)) break;
  }
  return static_cast<double>(best);
}

std::array<std::complex<double>, 2> drift_eigenvalues(const KerrMediumParams& medium,
                                                      double gamma, double delta,
                                                      double n, std::complex<double> a) {
  using namespace std::complex_literals;
  const double chi = medium.kerr_susceptibility;
  const double beta = medium.shg_loss;
  const std::complex<double> j11 = 1i * delta - gamma - (1i * chi + beta) * n;
  const std::complex<double> j12 = -(1i * chi + beta) * a * a;
  const std::complex<double> j21 = std::conj(j12);
  const std::complex<double> j22 = std::conj(j11);
  const std::complex<double> half_trace = 0.5 * (j11 + j22);
  const std::complex<double> det = j11 * j22 - j12 * j21;
  const std::complex<double> root = std::sqrt(half_trace * half_trace - det);
  return {half_trace + root, half_trace - root};
}

}  // namespace

double SteadyState::kerr_detuning(const KerrMediumParams& medium) const {
  return -medium.kerr_susceptibility * photon_number / effective_decay;
}

SteadyState make_steady_state(const CavityParams& cavity, const KerrMediumParams& medium,
                              double photon_number, double bare_detuning) {
  SteadyState s;
  s.photon_number = photon_number;
  s.bare_detuning = bare_detuning;
  s.effective_decay = cavity.linear_decay() + medium.shg_loss * photon_number;
  s.effective_detuning = bare_detuning - medium.kerr_susceptibility * photon_number;
  s.normalized_detuning = s.effective_detuning / s.effective_decay;
  s.intracavity_power = cavity.power_per_photon() * photon_number;
  const double drive = std::sqrt(2.0 * cavity.input_decay * cavity.input_photon_rate());
  s.field = drive / std::complex<double>(s.effective_decay, -s.effective_detuning);
  s.eigenvalues = drift_eigenvalues(medium, s.effective_decay, s.effective_detuning,
                                    photon_number, s.field);
  const double growth = std::max(s.eigenvalues[0].real(), s.eigenvalues[1].real());
  s.stability = growth < 0.0 ? Stability::stable : Stability::unstable;
  return s;
}

double balance_residual(const CavityParams& cavity, const KerrMediumParams& medium,
                        double photon_number, double bare_detuning) {
  const double rhs = cavity.drive_strength();
  const double g = cavity.linear_decay() + medium.shg_loss * photon_number;
  const double d = bare_detuning - medium.kerr_susceptibility * photon_number;
  const double lhs = photon_number * (g * g + d * d);
  if (rhs == 0.0) return std::abs(lhs);
  return std::abs(lhs - rhs) / rhs;
}

std::array<double, 4> scaled_balance_coefficients(const CavityParams& cavity,
                                                  const KerrMediumParams& medium,
                                                  double bare_detuning) {
  // n [(g'+b n)^2 + (D'-x n)^2] = R with n = y R / g'^2, divided by R.
  const double g = cavity.linear_decay();
  const double r = cavity.drive_strength();
  const double b = medium.shg_loss;
  const double x = medium.kerr_susceptibility;
  const double g2 = g * g;
  const double scale = r / g2;  // photons per unit y
  return {
      (b * b + x * x) * scale * scale / g2,
      2.0 * (g * b - bare_detuning * x) * scale / g2,
      1.0 + (bare_detuning * bare_detuning) / g2,
      -1.0,
  };
}

std::vector<SteadyState> solve_steady_states(const CavityParams& cavity,
                                             const KerrMediumParams& medium,
                                             double bare_detuning) {
  validate(cavity);
  validate(medium);
  require_finite(bare_detuning, "bare_detuning");

  if (cavity.drive_strength() == 0.0) {
    return {make_steady_state(cavity, medium, 0.0, bare_detuning)};
  }

  const auto coeffs = scaled_balance_coefficients(cavity, medium, bare_detuning);
  const ScaledCubic cubic{coeffs[0], coeffs[1], coeffs[2], coeffs[3]};

  std::vector<double> ys;
  for (double y : real_polynomial_roots(coeffs)) {
    if (y <= 0.0) continue;
    ys.push_back(polish(cubic, y));
  }
  std::sort(ys.begin(), ys.end());

  std::vector<double> merged;
  for (double y : ys) {
    if (!merged.empty() && std::abs(y - merged.back()) < kMergeTolerance * std::abs(y)) {
      merged.back() = 0.5 * (merged.back() + y);
    } else {
      merged.push_back(y);
    }
  }

  const double photons_per_y = cavity.drive_strength() / std::pow(cavity.linear_decay(), 2);
  std::vector<SteadyState> states;
  std::vector<double> residuals;
  bool failed = merged.empty();
  for (double y : merged) {
    const double n = y * photons_per_y;
    const double residual = static_cast<double>(std::fabs(cubic.value(y)));
    residuals.push_back(residual);
    if (!(residual <= kResidualTolerance)) failed = true;
    states.push_back(make_steady_state(cavity, medium, n, bare_detuning));
  }
  if (failed) {
    std::ostringstream msg;
    msg << "steady-state root finding failed at detuning " << bare_detuning
        << " rad/s; relative residuals:";
    for (double r : residuals) msg << ' ' << r;
    if (residuals.empty()) msg << " (no positive root)";
    throw Error(ErrorKind::numerical_failure, msg.str());
  }
  return states;
}

SteadyState steady_state_at_detuning(const CavityParams& cavity,
                                     const KerrMediumParams& medium,
                                     double effective_detuning) {
  validate(cavity);
  validate(medium);
  require_finite(effective_detuning, "effective_detuning");
  const double r = cavity.drive_strength();
  const double g = cavity.linear_decay();
  const double b = medium.shg_loss;
  const double d2 = effective_detuning * effective_detuning;

  // n ((g + b n)^2 + D^2) is strictly increasing in n for b >= 0.
  double n = r / (g * g + d2);
  if (b > 0.0 && r > 0.0) {
    double lo = 0.0;
    double hi = n;
    auto f = [&](double x) { return x * ((g + b * x) * (g + b * x) + d2) - r; };
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    n = 0.5 * (lo + hi);
    // Newton finish for full precision.
    for (int iter = 0; iter < 5; ++iter) {
      const double gb = g + b * n;
      const double slope = gb * gb + d2 + 2.0 * b * n * gb;
      n -= f(n) / slope;
    }
  }
  const double bare = effective_detuning + medium.kerr_susceptibility * n;
  return make_steady_state(cavity, medium, n, bare);
}

SteadyState steady_state_at_normalized_detuning(const CavityParams& cavity,
                                                const KerrMediumParams& medium, double xi) {
  validate(cavity);
  validate(medium);
  require_finite(xi, "xi");
  // With Delta = xi (g + b n) the balance reads n (g + b n)^2 (1 + xi^2) = r.
  const double target = cavity.drive_strength() / (1.0 + xi * xi);
  const double g = cavity.linear_decay();
  const double b = medium.shg_loss;
  double n = target / (g * g);
  if (b > 0.0 && target > 0.0) {
    auto f = [&](double x) { return x * (g + b * x) * (g + b * x) - target; };
    double lo = 0.0;
    double hi = n;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    n = 0.5 * (lo + hi);
    for (int iter = 0; iter < 5; ++iter) {
      const double gb = g + b * n;
      n -= f(n) / (gb * gb + 2.0 * b * n * gb);
    }
  }
  const double delta = xi * (g + b * n);
  return make_steady_state(cavity, medium, n, delta + medium.kerr_susceptibility * n);
}

double balance_discriminant(const CavityParams& cavity, const KerrMediumParams& medium,
                            double bare_detuning) {
  const auto c = scaled_balance_coefficients(cavity, medium, bare_detuning);
  const long double a = c[0], b = c[1], cc = c[2], d = c[3];
  const long double disc = 18.0L * a * b * cc * d - 4.0L * b * b * b * d + b * b * cc * cc -
                           4.0L * a * cc * cc * cc - 27.0L * a * a * d * d;
  return static_cast<double>(disc);
}

MultistabilityProbe probe_multistability(const CavityParams& cavity,
                                         const KerrMediumParams& medium, double xi0_low,
                                         double xi0_high, double step) {
  validate(cavity);
  validate(medium);
  if (!(xi0_high > xi0_low) || !(step > 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "probe needs low < high and step > 0");
  }
  const double gamma = cavity.linear_decay();
  auto disc = [&](double xi0) { return balance_discriminant(cavity, medium, xi0 * gamma); };

  const auto count = static_cast<std::size_t>(std::ceil((xi0_high - xi0_low) / step)) + 1;
  double best_x = xi0_low;
  double best_d = disc(xi0_low);
  for (std::size_t i = 1; i < count; ++i) {
    const double x = std::min(xi0_high, xi0_low + step * static_cast<double>(i));
    const double d = disc(x);
    if (d > best_d) {
      best_d = d;
      best_x = x;
    }
  }
  // Golden-section search on the bracketing cell pair.
  double a = std::max(xi0_low, best_x - step);
  double b = std::min(xi0_high, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = disc(x1);
  double f2 = disc(x2);
  for (int iter = 0; iter < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++iter) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = disc(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = disc(x2);
    }
  }
  const double x = f1 > f2 ? x1 : x2;
  const double d = std::max(f1, f2);

  MultistabilityProbe probe;
  if (d > best_d) {
    probe.bare_normalized_detuning = x;
    probe.discriminant = d;
  } else {
    probe.bare_normalized_detuning = best_x;
    probe.discriminant = best_d;
  }
  probe.branch_count =
      solve_steady_states(cavity, medium, probe.bare_normalized_detuning * gamma).size();
  probe.found = probe.discriminant > 0.0 && probe.branch_count == 3;
  return probe;
}

std::size_t PowerCurve::max_branch_count() const {
  std::size_t m = 0;
  for (const auto& p : points) m = std::max(m, p.branches.size());
  return m;
}

PowerCurve power_curve(const CavityParams& cavity, const KerrMediumParams& medium,
                       std::span<const double> bare_normalized_grid, unsigned jobs) {
  validate(cavity);
  validate(medium);
  for (std::size_t i = 0; i < bare_normalized_grid.size(); ++i) {
    require_finite(bare_normalized_grid[i], "detuning grid");
    if (i > 0 && bare_normalized_grid[i] < bare_normalized_grid[i - 1]) {
      throw Error(ErrorKind::invalid_parameter, "detuning grid must be sorted");
    }
  }

  PowerCurve curve;
  curve.resonant_power = derive_rates(cavity, medium, 0.0).resonant_power;
  curve.points.resize(bare_normalized_grid.size());
  const double gamma = cavity.linear_decay();
  parallel_for(bare_normalized_grid.size(), jobs, [&](std::size_t i) {
    auto& point = curve.points[i];
    point.bare_normalized_detuning = bare_normalized_grid[i];
    try {
      point.branches = solve_steady_states(cavity, medium, bare_normalized_grid[i] * gamma);
    } catch (const Error& e) {
      point.error = e.what();
    }
  });
  return curve;
}

double reflected_power(const CavityParams& cavity, const KerrMediumParams& medium,
                       const SteadyState& state) {
  validate(cavity);
  validate(medium);
  const double g = state.effective_decay;
  const double d = state.effective_detuning;
  const double gin = cavity.input_decay;
  return (1.0 - 4.0 * gin * (g - gin) / (g * g + d * d)) * cavity.input_power;
}

DetuningEstimate detuning_from_powers(double transmitted_power, double scan_max_power,
                                      double pdh_max_power) {
  require_finite(transmitted_power, "transmitted_power");
  require_finite(scan_max_power, "scan_max_power");
  require_finite(pdh_max_power, "pdh_max_power");
  if (transmitted_power <= 0.0 || scan_max_power <= 0.0 || pdh_max_power <= 0.0) {
    throw Error(ErrorKind::inconsistent_powers, "powers must be positive");
  }
  const double arg = scan_max_power * (1.0 / transmitted_power - 1.0 / pdh_max_power);
  if (arg < 0.0) {
    throw Error(ErrorKind::inconsistent_powers,
                "transmitted power exceeds the drift-corrected maximum");
  }
  DetuningEstimate est;
  est.xi = std::sqrt(arg);
  est.drift_model_questionable = std::abs(scan_max_power / pdh_max_power - 1.0) > 0.15;
  return est;
}

ShgDiscriminant shg_discriminant(const KerrMediumParams& medium, const CavityParams& cavity,
                                 double photon_number) {
  require_finite(photon_number, "photon_number");
  if (photon_number < 0.0) {
    throw Error(ErrorKind::invalid_parameter, "photon_number must be >= 0");
  }
  const double chi = medium.kerr_susceptibility;
  const double beta = medium.shg_loss;
  const double g = cavity.linear_decay();
  const double n = photon_number;
  ShgDiscriminant out;
  out.value = (chi * chi - 3.0 * beta * beta) * n * n - 4.0 * g * beta * n - g * g;
  out.amplification_wins = beta < std::abs(chi) / std::sqrt(3.0);
  return out;
}

std::optional<double> shg_discriminant_root(const KerrMediumParams& medium,
                                            const CavityParams& cavity) {
  const double chi = medium.kerr_susceptibility;
  const double beta = medium.shg_loss;
  const double g = cavity.linear_decay();
  const double a = chi * chi - 3.0 * beta * beta;
  // D(0) = -g^2 < 0 and D'(0) <= 0, so a positive root needs a > 0.
  if (!(a > 0.0)) return std::nullopt;
  const double b = -4.0 * g * beta;
  const double c = -g * g;
  // With b <= 0 and c < 0, q > 0 and q/a is the single positive root.
  const double q = -0.5 * (b - std::sqrt(b * b - 4.0 * a * c));
  return q / a;
}

}  // namespace kerrspring
