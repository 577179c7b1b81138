#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <complex>
#include <numeric>

#include "kerrspring/constants.hpp"
#include "kerrspring/core_model.hpp"
#include "kerrspring/errors.hpp"
#include "kerrspring/estimation.hpp"

using namespace kerrspring;

namespace {

SyntheticSpringParams params(double zeta, double k0, std::size_t points = 12) {
  SyntheticSpringParams p;
  p.zeta = zeta;
  p.k_opt_0 = k0;
  p.input_power = 0.6;
  p.temperature_label = "test";
  p.xi = default_detuning_grid(points);
  return p;
}

}  // namespace

TEST_CASE("model normalization and peak") {
  CHECK(model_k_opt(kOptimalDetuning, 0.0, 28.9) == doctest::Approx(28.9));
  for (double zeta : {-0.3, -0.8, 0.375 * kCriticalKerrGain, -1.5}) {
    double best = 0.0;
    double at = 0.0;
    for (int i = 1; i < 200000; ++i) {
      const double xi = i * 1e-5;
      const double k = model_k_opt(xi, zeta, 1.0);
      if (k > best) {
        best = k;
        at = xi;
      }
    }
    CHECK(at == doctest::Approx(kOptimalDetuning).epsilon(2e-5));
    CHECK(best == doctest::Approx(amplification_ratio(zeta)).epsilon(1e-9));
  }
}

TEST_CASE("noise-free data are fitted exactly") {
  const auto data = synthesize_dataset(params(-0.8, 20.0), 0.0, 1);
  const auto fit = fit_spring(data);
  CHECK(fit.zeta == doctest::Approx(-0.8).epsilon(1e-8));
  CHECK(fit.k_opt_0 == doctest::Approx(20.0).epsilon(1e-8));
  CHECK(fit.amplification == doctest::Approx(amplification_ratio(-0.8)).epsilon(1e-8));
  CHECK_FALSE(fit.unphysical_regime);
  CHECK(fit.starts.size() == 3);
  CHECK(fit.low_detuning_points.empty());
}

TEST_CASE("fit errors follow the covariance and A propagation") {
  const auto data = synthesize_dataset(params(-0.6, 10.0), 0.03, 99);
  const auto fit = fit_spring(data);
  CHECK(fit.zeta_err == doctest::Approx(std::sqrt(fit.covariance[0][0])));
  CHECK(fit.k_opt_0_err == doctest::Approx(std::sqrt(fit.covariance[1][1])));
  const double a = fit.amplification;
  CHECK(fit.amplification_err == doctest::Approx(a * a / std::abs(kCriticalKerrGain) * fit.zeta_err));
  CHECK(fit.chi_squared_reduced > 0.0);
}

TEST_CASE("dataset validation") {
  auto data = synthesize_dataset(params(-0.5, 1.0, 4), 0.0, 1);
  data.points.pop_back();
  CHECK_THROWS_AS(fit_spring(data), Error);
  SpringDataset narrow;
  for (double xi : {0.5, 0.6, 0.7, 0.8, 0.9}) narrow.points.push_back({xi, 1.0, 0.1});
  try {
    fit_spring(narrow);
    FAIL("expected invalid_parameter");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_parameter);
  }
  auto low = synthesize_dataset(params(-0.5, 1.0), 0.0, 1);
  low.points.push_back({0.1, model_k_opt(0.1, -0.5, 1.0), 0.01});
  const auto fit = fit_spring(low);
  REQUIRE(fit.low_detuning_points.size() == 1);
  CHECK(fit.low_detuning_points[0] == low.points.size() - 1);
}

TEST_CASE("synthetic data are deterministic per seed") {
  const auto a = synthesize_dataset(params(-0.5, 1.0), 0.03, 42);
  const auto b = synthesize_dataset(params(-0.5, 1.0), 0.03, 42);
  const auto c = synthesize_dataset(params(-0.5, 1.0), 0.03, 43);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].k_opt == b.points[i].k_opt);
  }
  CHECK(a.points[0].k_opt != c.points[0].k_opt);
  CHECK(a.points[0].sigma_k == doctest::Approx(0.03 * model_k_opt(a.points[0].xi, -0.5, 1.0)));
  CHECK_THROWS_AS(synthesize_dataset(params(-0.5, 1.0), 0.6, 1), Error);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("synthetic noise has the requested spread") {
  // Residuals of a noise-only dataset should have unit variance in sigma units.
  auto p = params(0.0, 1.0, 4000);
  const auto d = synthesize_dataset(p, 0.05, 8);
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& pt : d.points) {
    const double z = (pt.k_opt - model_k_opt(pt.xi, 0.0, 1.0)) / (0.05 * model_k_opt(pt.xi, 0.0, 1.0));
    sum += z;
    sum2 += z * z;
  }
  const double n = static_cast<double>(d.points.size());
  CHECK(std::abs(sum / n) < 0.06);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.07));
}

TEST_CASE("bootstrap does not depend on the worker count") {
  const auto data = synthesize_dataset(params(-0.7, 5.0), 0.03, 5);
  FitOptions one;
  one.bootstrap_samples = 40;
  one.seed = 9;
  FitOptions four = one;
  four.jobs = 4;
  const auto a = fit_spring(data, one);
  const auto b = fit_spring(data, four);
  REQUIRE(a.bootstrap_zeta_err);
  CHECK(*a.bootstrap_zeta_err == *b.bootstrap_zeta_err);
  CHECK(*a.bootstrap_zeta_err > 0.0);
}

TEST_CASE("Monte Carlo recovery at 3 % noise") {
  const auto s = monte_carlo_fit(params(0.375 * kCriticalKerrGain, 28.9), 0.03, 30, 1234, 2);
  CHECK(s.trials == 30);
  CHECK(s.failures == 0);
  CHECK(s.median_abs_zeta_error < 0.05);
  CHECK(s.median_rel_k_opt_0_error < 0.03);
}

TEST_CASE("critical power from zeta proportional to P0") {
  std::vector<PowerPoint> pts;
  for (double p : {0.15, 0.3, 0.45, 0.6}) pts.push_back({p, kCriticalKerrGain * p / 1.56, 0.02});
  const auto est = amplification_vs_power(pts);
  CHECK(est.critical_power == doctest::Approx(1.56));
  CHECK(est.slope == doctest::Approx(kCriticalKerrGain / 1.56));
  std::vector<PowerPoint> positive;
  for (double p : {0.15, 0.3, 0.45}) positive.push_back({p, 0.1 * p, 0.01});
  try {
    amplification_vs_power(positive);
    FAIL("expected no_divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_divergence);
  }
  pts.resize(2);
  CHECK_THROWS_AS(amplification_vs_power(pts), Error);
}

TEST_CASE("photothermal transfer fit") {
  const double gth = 2.0 * kPi * 30.0;
  const double w = 2000.0;
  std::vector<PhotothermalSample> samples;
  for (int i = 0; i <= 200; ++i) {
    const double omega = 2.0 * kPi * 10.0 * std::pow(700.0, i / 200.0);
    const std::complex<double> num(gth, omega);
    samples.push_back({omega, 0.8 * num / (w + num)});
  }
  const auto fit = fit_photothermal(samples, 2.0 * kPi * 20.0, 2.0 * kPi * 2000.0);
  CHECK(fit.converged);
  CHECK(fit.gamma_th == doctest::Approx(gth).epsilon(1e-7));
  CHECK(fit.omega_th_scale == doctest::Approx(w).epsilon(1e-7));
  CHECK(fit.gain_normalization == doctest::Approx(0.8).epsilon(1e-7));
  CHECK_FALSE(fit.fallback_normalization);

  try {
    fit_photothermal(samples, 2.0 * kPi * 100.0, 2.0 * kPi * 200.0);
    FAIL("expected insufficient_band");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_band);
  }
  CHECK_THROWS_AS(fit_photothermal(samples, 2.0 * kPi * 100.0, 2.0 * kPi * 1e5), Error);
}

TEST_CASE("weak photothermal coupling falls back to the 6-7 kHz level") {
  const double gth = 2.0 * kPi * 30.0;
  const double w = 20.0;
  std::vector<PhotothermalSample> samples;
  for (int i = 0; i <= 200; ++i) {
    const double omega = 2.0 * kPi * 10.0 * std::pow(700.0, i / 200.0);
    const std::complex<double> num(gth, omega);
    samples.push_back({omega, 0.5 * num / (w + num)});
  }
  const auto fit = fit_photothermal(samples, 2.0 * kPi * 20.0, 2.0 * kPi * 2000.0);
  CHECK(fit.fallback_normalization);
  CHECK(fit.gain_normalization == doctest::Approx(0.5).epsilon(1e-3));
}
