#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kerrspring/constants.hpp"
#include "kerrspring/core_model.hpp"
#include "kerrspring/dynamics.hpp"
#include "kerrspring/estimation.hpp"
#include "kerrspring/interferometer.hpp"
#include "kerrspring/io.hpp"
#include "kerrspring/recipes.hpp"
#include "kerrspring/response.hpp"
#include "kerrspring/steady_state.hpp"
#include "oracles.hpp"

using namespace kerrspring;
using kerrspring::testing::rel_diff;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

CavityParams lossless_cavity(double cavity_finesse, double input_power = 0.6) {
  return kerrspring::testing::make_cavity(cavity_finesse, 0.0, input_power);
}

KerrMediumParams pure_kerr(const CavityParams& c, double zeta) {
  return kerrspring::testing::make_medium(c, zeta, 0.0);
}

double static_at_xi(const CavityParams& c, const KerrMediumParams& m, double xi) {
  return static_spring_constant(c, m, steady_state_at_normalized_detuning(c, m, xi));
}

// Golden-section maximum of the physical static spring over xi.
double argmax_spring(const CavityParams& c, const KerrMediumParams& m) {
  double lo = 0.1;
  double hi = 1.5;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - r * (hi - lo);
  double b = lo + r * (hi - lo);
  double fa = static_at_xi(c, m, a);
  double fb = static_at_xi(c, m, b);
  while (hi - lo > 1e-9) {
    if (fa > fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - r * (hi - lo);
      fa = static_at_xi(c, m, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + r * (hi - lo);
      fb = static_at_xi(c, m, b);
    }
  }
  return 0.5 * (lo + hi);
}

Outcome multistability_threshold() {
  const auto start = Clock::now();
  const CavityParams c = lossless_cavity(100.0);
  std::vector<double> grid;
  for (int i = 0; i <= 8000; ++i) grid.push_back(-2.0 + i * 1e-3);
  double first = std::nan("");
  bool grid_hit = false;
  for (int step = 0; step <= 100; ++step) {
    const double zeta = -1.0 - 0.01 * step;
    const KerrMediumParams m = pure_kerr(c, zeta);
    grid_hit = power_curve(c, m, grid).max_branch_count() >= 3;
    const bool probe_hit = probe_multistability(c, m, -2.0, 6.0, 1e-2).found;
    if (grid_hit || probe_hit) {
      first = zeta;
      break;
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = std::abs(first - kCriticalKerrGain) <= 0.01 && elapsed < 10.0;
  return {ok, "first zeta with three roots = " + fmt("%.2f", first) + " (target " +
                  fmt("%.4f", kCriticalKerrGain) + " +/- 0.01, seen on the 1e-3 grid: " +
                  (grid_hit ? "yes" : "no") + "), " + fmt("%.2f", elapsed) + " s (< 10 s)"};
}

Outcome amplification_headline() {
  const auto start = Clock::now();
  const CavityParams c = lossless_cavity(100.0);
  const double xi = kOptimalDetuning;
  const double linear = static_at_xi(c, pure_kerr(c, 0.0), xi);
  const double kerr = static_at_xi(c, pure_kerr(c, 0.375 * kCriticalKerrGain), xi);
  const double ratio = kerr / linear;
  const bool ratio_ok = std::abs(ratio - 1.6) <= 1e-6 * 1.6;

  const ModelConfig cfg = default_model_config();
  MechanicalParams mech = cfg.mechanics;
  mech.resonance = 2.0 * kPi * 14.0;
  const double linear_spring =
      mech.mass * (std::pow(2.0 * kPi * 53.0, 2) - std::pow(mech.resonance, 2));
  const double linear_hz =
      composite_resonance(mech, Complex(linear_spring, 0.0)).angular_frequency / (2.0 * kPi);
  const double kerr_hz =
      composite_resonance(mech, Complex(ratio * linear_spring, 0.0)).angular_frequency /
      (2.0 * kPi);
  const bool map_ok = kerr_hz >= 66.9 && kerr_hz <= 67.1;
  const double elapsed = seconds_since(start);
  return {ratio_ok && map_ok && elapsed < 1.0,
          "ratio = " + fmt("%.9f", ratio) + " (1.6 +/- 1e-6 rel: " + (ratio_ok ? "ok" : "off") +
              "); composite " + fmt("%.3f", linear_hz) + " Hz -> " + fmt("%.3f", kerr_hz) +
              " Hz (window 66.9-67.1 Hz: " + (map_ok ? "ok" : "outside") + "), " +
              fmt("%.3f", elapsed) + " s (< 1 s)"};
}

Outcome argmax_property() {
  std::mt19937_64 rng(20260315);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CavityParams c = lossless_cavity(100.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double zeta = kCriticalKerrGain * (1.0 - u(rng)) * (1.0 - 1e-9);
    worst = std::max(worst, std::abs(argmax_spring(c, pure_kerr(c, zeta)) - kOptimalDetuning));
  }
  return {worst <= 1e-4, "max |argmax - 1/sqrt(3)| = " + fmt("%.2e", worst) +
                             " over 20 zeta in (zeta_0, 0] (tolerance 1e-4)"};
}

Outcome formula_cross_validation() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double cavity_finesse = 50.0 + 950.0 * u(rng);
    const double power = 0.05 + 1.95 * u(rng);
    const double zeta = kCriticalKerrGain * (1.0 - u(rng)) * (1.0 - 1e-9);
    const double xi = 0.05 + 3.95 * u(rng);
    const CavityParams c = lossless_cavity(cavity_finesse, power);
    const KerrMediumParams m = pure_kerr(c, zeta);
    const SteadyState s = steady_state_at_normalized_detuning(c, m, xi);
    const double dynamic_at_zero = lossless_spring_constant(c, m, s, 0.0).real();
    const double general = static_spring_constant(c, m, s);
    const double g = c.linear_decay();
    const double resonant = kSpeedOfLight * c.input_power / (c.half_cycle_length * g);
    const double k0 = 4.0 * c.carrier_angular_frequency * resonant /
                      (c.half_cycle_length * kSpeedOfLight * g) * 3.0 * std::sqrt(3.0) / 16.0;
    const double parameterized = model_k_opt(xi, zeta, k0);
    worst = std::max({worst, rel_diff(dynamic_at_zero, general),
                      rel_diff(dynamic_at_zero, parameterized), rel_diff(general, parameterized)});
  }
  return {worst <= 1e-10,
          "max pairwise relative difference = " + fmt("%.2e", worst) + " over 1000 draws (1e-10)"};
}

Outcome dynamics_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CavityParams c = lossless_cavity(100.0);
  const double g = c.linear_decay();
  const double tau = 2.0 * kPi / g;
  double worst = 0.0;
  int unmatched = 0;
  for (int i = 0; i < 50; ++i) {
    const double zeta = 2.0 * kCriticalKerrGain * u(rng) + 0.3 * u(rng);
    const double bare = (-3.0 + 7.0 * u(rng)) * g;
    const KerrMediumParams m = pure_kerr(c, zeta);
    IntegrationOptions opt;
    opt.duration = 60.0 * tau;
    opt.record_interval = opt.duration;
    const Trajectory t = integrate_field(c, m, [bare](double) { return bare; }, {0.0, 0.0}, opt);
    const double n = t.photon_number.back();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : solve_steady_states(c, m, bare)) {
      if (s.stable()) best = std::min(best, rel_diff(n, s.photon_number));
    }
    if (!std::isfinite(best)) ++unmatched;
    worst = std::max(worst, best);
  }
  const bool states_ok = worst <= 1e-6 && unmatched == 0;

  std::string rises;
  bool rises_ok = true;
  for (double factor : {1.5, 2.0}) {
    const double zeta = factor * kCriticalKerrGain;
    const CavityParams cavity = lossless_cavity(300.0);
    const KerrMediumParams medium = pure_kerr(cavity, zeta);
    const double gs = cavity.linear_decay();
    const double ts = 2.0 * kPi / gs;
    ScanConfig up;
    up.direction = ScanDirection::upward;
    up.detuning_low = -2.0 * gs;
    up.detuning_high = (-zeta + 3.0) * gs;
    up.scan_rate = scan_rate_for(cavity, up.detuning_low, up.detuning_high, 100.0);
    up.record_interval = ts / 50.0;
    const Trajectory t = scan(cavity, medium, up);
    const Discontinuity* jump = nullptr;
    for (const auto& d : t.discontinuities) {
      if (!jump || std::abs(d.amplitude) > std::abs(jump->amplitude)) jump = &d;
    }
    const double ratio = jump ? jump->rise_time / ts : std::nan("");
    const bool ok = jump && ratio >= 0.5 && ratio <= 2.0;
    rises_ok = rises_ok && ok;
    rises += " rise/tau at " + fmt("%.1f", factor) + " zeta_0 = " + fmt("%.3f", ratio) + ";";
  }
  const double elapsed = seconds_since(start);
  return {states_ok && rises_ok && elapsed < 60.0,
          "terminal-state max rel error = " + fmt("%.2e", worst) + " (1e-6), unmatched " +
              std::to_string(unmatched) + ";" + rises + " window [0.5, 2]; " +
              fmt("%.1f", elapsed) + " s (< 60 s)"};
}

Outcome fit_recovery() {
  const auto start = Clock::now();
  SyntheticSpringParams p;
  p.zeta = 0.375 * kCriticalKerrGain;
  p.k_opt_0 = reference_linear_spring();
  p.input_power = 0.6;
  p.temperature_label = "mc";
  p.xi = default_detuning_grid(12);
  const MonteCarloSummary mc = monte_carlo_fit(p, 0.03, 100, 0x6d6f6e7465, 1);
  const bool mc_ok = mc.failures == 0 && mc.median_abs_zeta_error < 0.05 &&
                     mc.median_rel_k_opt_0_error < 0.03;

  const auto datasets =
      read_spring_datasets(std::string(KERRSPRING_DATA_DIR) + "/spring_datasets.csv");
  std::vector<FitResult> fits;
  for (const auto& d : datasets) {
    if (d.temperature_label == "39.6C") fits.push_back(fit_spring(d));
  }
  const CriticalPowerEstimate crit = amplification_vs_power(to_power_points(fits));
  const bool crit_ok = fits.size() >= 3 && std::abs(crit.critical_power - 1.56) <= 0.37;
  const double elapsed = seconds_since(start);
  return {mc_ok && crit_ok && elapsed < 30.0,
          "median |dzeta| = " + fmt("%.4f", mc.median_abs_zeta_error) +
              " (< 0.05), median k0 rel error = " + fmt("%.4f", mc.median_rel_k_opt_0_error) +
              " (< 0.03), failures " + std::to_string(mc.failures) +
              "; packaged 39.6C P_crit = " + fmt("%.3f", crit.critical_power) +
              " W (1.56 +/- 0.37 W); " + fmt("%.1f", elapsed) + " s (< 30 s)"};
}

Outcome interferometer_identities() {
  double decomposition = 0.0;
  for (int i = 1; i < 2000; ++i) {
    decomposition = std::max(decomposition, kerr_decomposition(-2.0 * i / 2000.0).residual);
  }

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double chain = 0.0;
  for (int i = 0; i < 100; ++i) {
    MichelsonParams p;
    p.srm_reflectivity = 0.3 + 0.69 * u(rng);
    p.srm_transmissivity = std::sqrt(1.0 - p.srm_reflectivity * p.srm_reflectivity);
    p.arm_length = 4000.0;
    p.arm_power = 1e3 + 1e5 * u(rng);
    p.detune_phase = -1.0 + 2.0 * u(rng);
    p.kerr_phase = -1.5 * u(rng) - 1e-3;
    p.mass = 40.0;
    p.carrier_angular_frequency = 2.0 * kPi * kSpeedOfLight / 1.064e-6;
    const double omega = 2.0 * kPi * (1.0 + 4999.0 * u(rng));
    const auto closed = interferometer_response(p, omega);
    const auto built = chain_response(p, omega, ArmBlock::kerr);
    const auto rel = [](const ComplexQuadMatrix& a, const ComplexQuadMatrix& b) {
      return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
    };
    chain = std::max({chain, std::abs(built.M - closed.M) / std::abs(closed.M),
                      rel(built.A, closed.A), rel(built.H, closed.H)});
  }

  double mismatch = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double ts2 = std::pow(10.0, -6.0 + 2.0 * u(rng));
    const double xi = 0.3 + 2.7 * u(rng);
    const double zeta = 0.5 * kCriticalKerrGain * (1.0 - u(rng));
    mismatch = std::max(mismatch, kerrspring::testing::michelson_cavity_mismatch(ts2, xi, zeta));
  }
  return {decomposition < 1e-12 && chain <= 1e-10 && mismatch < 1e-3,
          "decomposition residual = " + fmt("%.2e", decomposition) + " (< 1e-12); chain vs " +
              "closed form = " + fmt("%.2e", chain) + " (1e-10); Michelson vs cavity spring = " +
              fmt("%.2e", mismatch) + " (< 1e-3)"};
}

Outcome figure_recipes() {
  const auto start = Clock::now();
  std::string detail;
  bool ok = true;
  for (const char* name : {"fig1b", "figS2"}) {
    const RecipeResult r = run_recipe(name, 1);
    std::size_t passed = 0;
    for (const auto& c : r.checks) passed += c.passed ? 1 : 0;
    ok = ok && r.passed();
    detail += std::string(name) + " " + std::to_string(passed) + "/" +
              std::to_string(r.checks.size()) + " checks; ";
  }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < 300.0, detail + fmt("%.1f", elapsed) + " s (< 300 s)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kerrspring acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "multistability threshold", multistability_threshold},
      {2, "amplification headline", amplification_headline},
      {3, "argmax property", argmax_property},
      {4, "formula cross-validation", formula_cross_validation},
      {5, "dynamics vs algebra", dynamics_oracle},
      {6, "fit recovery", fit_recovery},
      {7, "interferometer identities", interferometer_identities},
      {8, "figure recipes", figure_recipes},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.passed ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds_since(start));
    failures += o.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
