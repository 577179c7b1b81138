#include "kerrspring/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "kerrspring/constants.hpp"
#include "kerrspring/core_model.hpp"
#include "kerrspring/errors.hpp"
#include "kerrspring/least_squares.hpp"
#include "kerrspring/parallel.hpp"

namespace kerrspring {

namespace {

constexpr double kModelScale = 16.0 / (3.0 * std::numbers::sqrt3);

// Unit-amplitude model shape and its zeta derivative.
struct ModelShape {
  double value;
  double d_zeta;
};

ModelShape model_shape(double xi, double zeta) {
  const double u = 1.0 + xi * xi;
  const double denom = u + 2.0 * zeta * xi / u;
  if (!(std::abs(denom) > 1e-300)) {
    throw Error(ErrorKind::divergent_spring, "spring model pole");
  }
  const double value = kModelScale * xi / (u * denom);
  return {value, -value / denom * 2.0 * xi / u};
}

// Standard normal deviates by Box-Muller on mt19937_64, so the stream is
// identical across standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  std::uint64_t next_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  // Uniform on (0, 1) from the top 53 bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

struct CoreFit {
  LeastSquaresResult best;
  std::vector<StartDiagnostics> starts;
  bool ok = false;
};

CoreFit fit_spring_core(const std::vector<SpringPoint>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  const ResidualFn residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& pt = pts[static_cast<std::size_t>(i)];
      r(i) = (p(1) * model_shape(pt.xi, p(0)).value - pt.k_opt) / pt.sigma_k;
    }
    return r;
  };
  const JacobianFn jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& pt = pts[static_cast<std::size_t>(i)];
      const auto s = model_shape(pt.xi, p(0));
      j(i, 0) = p(1) * s.d_zeta / pt.sigma_k;
      j(i, 1) = s.value / pt.sigma_k;
    }
    return j;
  };

  CoreFit out;
  for (double zeta0 : {0.0, 0.5 * kCriticalKerrGain, 0.9 * kCriticalKerrGain}) {
    // Amplitude from the linear least-squares solution at the fixed start.
    double num = 0.0, den = 0.0;
    for (const auto& pt : pts) {
      const double f = model_shape(pt.xi, zeta0).value;
      const double w = 1.0 / (pt.sigma_k * pt.sigma_k);
      num += w * f * pt.k_opt;
      den += w * f * f;
    }
    Eigen::VectorXd start(2);
    start << zeta0, den > 0.0 ? num / den : 1.0;
    const auto res = solve_least_squares(residuals, jacobian, start);
    out.starts.push_back({zeta0, res.converged, res.cost, res.iterations, res.message});
    if (res.converged && (!out.ok || res.cost < out.best.cost)) {
      out.best = res;
      out.ok = true;
    }
  }
  return out;
}

void validate_dataset(const SpringDataset& data) {
  if (data.points.size() < 4) {
    throw Error(ErrorKind::invalid_parameter, "spring fit needs at least 4 points");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : data.points) {
    require_finite(p.xi, "xi");
    require_finite(p.k_opt, "k_opt");
    require_finite(p.sigma_k, "sigma_k");
    if (!(p.sigma_k > 0.0)) throw Error(ErrorKind::invalid_parameter, "sigma_k must be > 0");
    if (!(p.xi > 0.0)) throw Error(ErrorKind::invalid_parameter, "xi must be > 0");
    lo = std::min(lo, p.xi);
    hi = std::max(hi, p.xi);
  }
  if (lo > 0.4 || hi < 1.5) {
    std::ostringstream msg;
    msg << "detuning range [" << lo << ", " << hi << "] does not cover [0.4, 1.5]";
    throw Error(ErrorKind::invalid_parameter, msg.str());
  }
}

}  // namespace

double model_k_opt(double xi, double zeta, double k_opt_0) {
  return k_opt_0 * model_shape(xi, zeta).value;
}

FitResult fit_spring(const SpringDataset& dataset, const FitOptions& options) {
  validate_dataset(dataset);
  const auto core = fit_spring_core(dataset.points);
  if (!core.ok) {
    std::ostringstream msg;
    msg << "spring fit did not converge from any start:";
    for (const auto& s : core.starts) {
      msg << " [zeta0=" << s.zeta_start << ": " << s.message << ", cost=" << s.cost << "]";
    }
    throw Error(ErrorKind::fit_failure, msg.str());
  }

  FitResult fit;
  fit.starts = core.starts;
  fit.input_power = dataset.input_power;
  fit.temperature_label = dataset.temperature_label;
  fit.zeta = core.best.params(0);
  fit.k_opt_0 = core.best.params(1);
  const double dof = static_cast<double>(dataset.points.size()) - 2.0;
  fit.chi_squared_reduced = core.best.cost / dof;
  const Eigen::MatrixXd cov =
      normal_matrix_inverse(core.best.jacobian) * fit.chi_squared_reduced;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) fit.covariance[r][c] = cov(r, c);
  }
  fit.zeta_err = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.k_opt_0_err = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.unphysical_regime = fit.zeta / kCriticalKerrGain >= 1.0;
  if (fit.unphysical_regime) {
    fit.amplification = std::numeric_limits<double>::quiet_NaN();
    fit.amplification_err = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.amplification = amplification_ratio(fit.zeta);
    fit.amplification_err =
        fit.amplification * fit.amplification / std::abs(kCriticalKerrGain) * fit.zeta_err;
  }
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    if (dataset.points[i].xi < kLowDetuningLimit) fit.low_detuning_points.push_back(i);
  }

  if (options.bootstrap_samples > 0) {
    const std::size_t b = options.bootstrap_samples;
    std::vector<double> zetas(b, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> amps(b, std::numeric_limits<double>::quiet_NaN());
    parallel_for(b, options.jobs, [&](std::size_t k) {
      NormalStream rng(derive_seed(options.seed, k));
      std::vector<SpringPoint> resample(dataset.points.size());
      for (auto& p : resample) p = dataset.points[rng.next_index(dataset.points.size())];
      const auto res = fit_spring_core(resample);
      if (res.ok) {
        zetas[k] = res.best.params(0);
        amps[k] = res.best.params(1);
      }
    });
    auto drop_nan = [](std::vector<double> v) {
      v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }),
              v.end());
      return v;
    };
    fit.bootstrap_zeta_err = stddev(drop_nan(zetas));
    fit.bootstrap_k_opt_0_err = stddev(drop_nan(amps));
  }
  return fit;
}

PhotothermalFit fit_photothermal(const std::vector<PhotothermalSample>& samples,
                                 double band_low, double band_high, const RateShape& shape) {
  require_finite(band_low, "band_low");
  require_finite(band_high, "band_high");
  if (!(band_low > 0.0) || band_high <= band_low) {
    throw Error(ErrorKind::invalid_parameter, "band must satisfy 0 < low < high");
  }
  if (std::log10(band_high / band_low) < 0.5) {
    throw Error(ErrorKind::insufficient_band, "fit band is narrower than half a decade");
  }
  std::vector<PhotothermalSample> in_band;
  double support_lo = std::numeric_limits<double>::infinity();
  double support_hi = 0.0;
  for (const auto& s : samples) {
    support_lo = std::min(support_lo, s.omega);
    support_hi = std::max(support_hi, s.omega);
    if (s.omega >= band_low && s.omega <= band_high) in_band.push_back(s);
  }
  if (samples.empty() || band_low < support_lo * (1.0 - 1e-12) ||
      band_high > support_hi * (1.0 + 1e-12)) {
    throw Error(ErrorKind::invalid_parameter, "fit band lies outside the sample support");
  }
  if (in_band.size() < 3) {
    throw Error(ErrorKind::insufficient_band, "fewer than 3 samples inside the fit band");
  }

  const auto n = static_cast<Eigen::Index>(in_band.size());
  std::vector<std::complex<double>> s(in_band.size(), 1.0);
  if (shape) {
    for (std::size_t i = 0; i < in_band.size(); ++i) s[i] = shape(in_band[i].omega);
  }
  // Parameters (w, gamma_th, g); residuals relative to |H| so that every
  // decade weighs the same.
  const ResidualFn residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& smp = in_band[static_cast<std::size_t>(i)];
      const std::complex<double> num(p(1), smp.omega);
      const std::complex<double> model = p(2) * num / (p(0) * s[static_cast<std::size_t>(i)] + num);
      const std::complex<double> diff = (model - smp.value) / std::abs(smp.value);
      r(2 * i) = diff.real();
      r(2 * i + 1) = diff.imag();
    }
    return r;
  };

  const double g0 = std::abs(in_band.back().value);
  LeastSquaresResult best;
  bool have = false;
  const double mid = std::sqrt(band_low * band_high);
  for (double gamma0 : {band_low * 0.1, band_low, mid, band_high}) {
    for (double w0 : {0.1 * mid, mid, 10.0 * mid, -mid}) {
      Eigen::VectorXd start(3);
      start << w0, gamma0, g0;
      const auto res = solve_least_squares(residuals, {}, start);
      if (!have || (res.converged && (!best.converged || res.cost < best.cost)) ||
          (!best.converged && res.cost < best.cost)) {
        best = res;
        have = true;
      }
    }
  }

  PhotothermalFit fit;
  fit.omega_th_scale = best.params(0);
  fit.gamma_th = best.params(1);
  fit.gain_normalization = best.params(2);
  fit.converged = best.converged;
  fit.cost = best.cost;
  if (std::abs(fit.omega_th_scale) < std::abs(fit.gamma_th)) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& smp : samples) {
      const double f = smp.omega / (2.0 * kPi);
      if (f >= 6000.0 && f <= 7000.0) {
        acc += std::abs(smp.value);
        ++count;
      }
    }
    if (count > 0) {
      fit.gain_normalization = acc / static_cast<double>(count);
      fit.fallback_normalization = true;
    } else {
      warn("photothermal fit: no samples in the 6-7 kHz band; keeping fitted gain");
    }
  }
  return fit;
}

std::vector<PowerPoint> to_power_points(const std::vector<FitResult>& fits) {
  std::vector<PowerPoint> out;
  out.reserve(fits.size());
  for (const auto& f : fits) out.push_back({f.input_power, f.zeta, f.zeta_err});
  return out;
}

CriticalPowerEstimate amplification_vs_power(const std::vector<PowerPoint>& points) {
  std::set<double> distinct;
  bool weighted = true;
  for (const auto& p : points) {
    require_finite(p.input_power, "input_power");
    require_finite(p.zeta, "zeta");
    if (!(p.input_power > 0.0)) {
      throw Error(ErrorKind::invalid_parameter, "input powers must be positive");
    }
    distinct.insert(p.input_power);
    if (!(p.zeta_err > 0.0)) weighted = false;
  }
  if (distinct.size() < 3) {
    throw Error(ErrorKind::invalid_parameter, "need at least 3 distinct input powers");
  }
  double spp = 0.0, spz = 0.0;
  for (const auto& p : points) {
    const double w = weighted ? 1.0 / (p.zeta_err * p.zeta_err) : 1.0;
    spp += w * p.input_power * p.input_power;
    spz += w * p.input_power * p.zeta;
  }
  CriticalPowerEstimate est;
  est.slope = spz / spp;
  if (!(est.slope < 0.0)) {
    throw Error(ErrorKind::no_divergence,
                "fitted Kerr gain does not decrease with power; no critical power");
  }
  double chi2 = 0.0;
  for (const auto& p : points) {
    const double w = weighted ? 1.0 / (p.zeta_err * p.zeta_err) : 1.0;
    const double r = p.zeta - est.slope * p.input_power;
    chi2 += w * r * r;
  }
  const double chi2_red = chi2 / static_cast<double>(points.size() - 1);
  est.slope_err = std::sqrt(chi2_red / spp);
  est.critical_power = kCriticalKerrGain / est.slope;
  est.critical_power_err = std::abs(kCriticalKerrGain) / (est.slope * est.slope) * est.slope_err;
  return est;
}

SpringDataset synthesize_dataset(const SyntheticSpringParams& params, double noise,
                                 std::uint64_t seed) {
  require_finite(noise, "noise");
  if (noise < 0.0 || noise > 0.5) {
    throw Error(ErrorKind::invalid_parameter, "noise fraction must lie in [0, 0.5]");
  }
  SpringDataset data;
  data.input_power = params.input_power;
  data.temperature_label = params.temperature_label;
  NormalStream rng(seed);
  for (double xi : params.xi) {
    const double k = model_k_opt(xi, params.zeta, params.k_opt_0);
    const double sigma = std::max(noise, 1e-3) * std::abs(k);
    data.points.push_back({xi, k * (1.0 + noise * rng.next()), sigma});
  }
  return data;
}

std::vector<double> default_detuning_grid(std::size_t count) {
  std::vector<double> xi(count);
  for (std::size_t i = 0; i < count; ++i) {
    xi[i] = count == 1 ? 0.35
                       : 0.35 + 1.65 * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return xi;
}

MonteCarloSummary monte_carlo_fit(const SyntheticSpringParams& params, double noise,
                                  std::size_t trials, std::uint64_t root_seed, unsigned jobs) {
  std::vector<double> zeta(trials, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> k0(trials, std::numeric_limits<double>::quiet_NaN());
  parallel_for(trials, jobs, [&](std::size_t i) {
    const auto data = synthesize_dataset(params, noise, derive_seed(root_seed, i));
    try {
      const auto fit = fit_spring(data);
      zeta[i] = fit.zeta;
      k0[i] = fit.k_opt_0;
    } catch (const Error&) {
    }
  });
  MonteCarloSummary out;
  out.trials = trials;
  std::vector<double> abs_err, bias, rel_k;
  for (std::size_t i = 0; i < trials; ++i) {
    if (std::isnan(zeta[i])) {
      ++out.failures;
      continue;
    }
    abs_err.push_back(std::abs(zeta[i] - params.zeta));
    bias.push_back(zeta[i] - params.zeta);
    rel_k.push_back(std::abs(k0[i] / params.k_opt_0 - 1.0));
  }
  out.median_abs_zeta_error = median(abs_err);
  out.median_zeta_bias = median(bias);
  out.median_rel_k_opt_0_error = median(rel_k);
  out.zeta_estimates = std::move(zeta);
  return out;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  // splitmix64 finalizer over the combined state.
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace kerrspring
