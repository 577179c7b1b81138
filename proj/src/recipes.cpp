#include "kerrspring/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kerrspring/constants.hpp"
#include "kerrspring/dynamics.hpp"
#include "kerrspring/errors.hpp"
#include "kerrspring/response.hpp"
#include "kerrspring/steady_state.hpp"

namespace kerrspring {

namespace {

constexpr std::uint64_t kPackagedSeed = 0x6b65727273707231ULL;
constexpr double kPackagedNoise = 0.03;
constexpr std::size_t kPackagedPoints = 12;
constexpr double kReferencePower = 0.6;

RecipeCheck make_check(std::string name, double value, double expected, double tolerance,
                       std::string detail = {}) {
  RecipeCheck c;
  c.name = std::move(name);
  c.value = value;
  c.expected = expected;
  c.tolerance = tolerance;
  c.passed = std::isfinite(value) && std::abs(value - expected) <= tolerance;
  c.detail = std::move(detail);
  return c;
}

RecipeCheck flag_check(std::string name, bool ok, std::string detail = {}) {
  return make_check(std::move(name), ok ? 1.0 : 0.0, 1.0, 0.0, std::move(detail));
}

std::string to_csv_text(const std::string& recipe, const std::string& what,
                        const std::string& units, const CsvTable& table) {
  std::ostringstream out;
  write_csv(out, {"kerrspring reproduce " + recipe, what, "units: " + units}, table);
  return out.str();
}

std::string num(double v) { return format_number(v); }

// Lossless cavity of the given finesse with the default geometry and power.
CavityParams lossless_cavity(double cavity_finesse) {
  CavityParams c = default_model_config().cavity;
  c.input_decay = decay_for_finesse(c.half_cycle_length, cavity_finesse);
  c.other_loss_decay = 0.0;
  return c;
}

KerrMediumParams pure_kerr(const CavityParams& cavity, double zeta) {
  KerrMediumParams m = default_model_config().medium;
  m.shg_loss = 0.0;
  m.micro.reset();
  m.kerr_susceptibility = susceptibility_for_kerr_gain(
      zeta, cavity.input_power, cavity.linear_decay(), cavity.carrier_angular_frequency);
  return m;
}

RecipeResult fig1b(unsigned jobs) {
  RecipeResult r;
  r.recipe = "fig1b";
  r.figure = "normalized intracavity power versus bare detuning, linear (zeta=0) and Kerr (zeta=-1)";

  const CavityParams cavity = lossless_cavity(100.0);
  std::vector<double> grid;
  for (int i = 0; i <= 2000; ++i) grid.push_back(-4.0 + 0.005 * i);

  CsvTable table;
  table.columns = {"zeta", "xi0", "branch_index", "n_bar", "P_over_Pmax", "xi", "stable"};
  double lorentz_err = 0.0;
  double kerr_peak = 0.0;
  double kerr_peak_at = 0.0;
  std::size_t max_branches = 0;
  std::vector<double> kerr_power(grid.size(), 0.0);

  for (double zeta : {0.0, -1.0}) {
    const KerrMediumParams medium = pure_kerr(cavity, zeta);
    const PowerCurve curve = power_curve(cavity, medium, grid, jobs);
    max_branches = std::max(max_branches, curve.max_branch_count());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const auto& pt = curve.points[i];
      if (pt.error) throw Error(ErrorKind::numerical_failure, *pt.error);
      for (std::size_t b = 0; b < pt.branches.size(); ++b) {
        const auto& s = pt.branches[b];
        const double p = s.intracavity_power / curve.resonant_power;
        table.add_row({num(zeta), num(pt.bare_normalized_detuning), std::to_string(b),
                       num(s.photon_number), num(p), num(s.normalized_detuning),
                       s.stable() ? "1" : "0"});
        if (zeta == 0.0) {
          const double x = pt.bare_normalized_detuning;
          lorentz_err = std::max(lorentz_err, std::abs(p * (1.0 + x * x) - 1.0));
        } else {
          kerr_power[i] = p;
          if (p > kerr_peak) {
            kerr_peak = p;
            kerr_peak_at = pt.bare_normalized_detuning;
          }
        }
      }
    }
  }
  r.files.push_back({"fig1b_power_curves.csv",
                     to_csv_text("fig1b", "lossless cavity, F=100", "n_bar in photons", table)});

  auto kerr_at = [&](double x) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), x - 1e-9);
    return kerr_power[static_cast<std::size_t>(it - grid.begin())];
  };
  r.checks.push_back(make_check("linear_curve_is_lorentzian", lorentz_err, 0.0, 1e-12,
                                "max |P (1 + xi0^2) - 1| at zeta = 0"));
  r.checks.push_back(make_check("kerr_peak_height", kerr_peak, 1.0, 1e-3,
                                "Kerr curve keeps the linear maximum"));
  r.checks.push_back(make_check("kerr_peak_location", kerr_peak_at, 1.0, 0.0051,
                                "peak shifts to xi0 = -zeta"));
  r.checks.push_back(make_check("single_valued", static_cast<double>(max_branches), 1.0, 0.0,
                                "|zeta| < |zeta_0| gives one steady state"));
  const double skew = kerr_at(kerr_peak_at - 0.5) - kerr_at(kerr_peak_at + 0.5);
  r.checks.push_back(make_check("kerr_skew", skew, 0.375, 0.05,
                                "P(peak - 0.5) - P(peak + 0.5): gentle rise, steep fall"));
  return r;
}

const Discontinuity* largest_jump(const Trajectory& t) {
  const Discontinuity* best = nullptr;
  for (const auto& d : t.discontinuities) {
    if (!best || std::abs(d.amplitude) > std::abs(best->amplitude)) best = &d;
  }
  return best;
}

RecipeResult figS2(unsigned) {
  RecipeResult r;
  r.recipe = "figS2";
  r.figure = "upward and downward cavity scans at finesse 300 beyond the multistability threshold";

  const double zeta = 1.5 * kCriticalKerrGain;
  const CavityParams cavity = lossless_cavity(300.0);
  const KerrMediumParams medium = pure_kerr(cavity, zeta);
  const double g = cavity.linear_decay();
  const double tau = 2.0 * kPi / g;

  ScanConfig up;
  up.direction = ScanDirection::upward;
  up.detuning_low = -2.0 * g;
  up.detuning_high = (-zeta + 3.0) * g;
  up.scan_rate = scan_rate_for(cavity, up.detuning_low, up.detuning_high, 100.0);
  up.record_interval = tau / 50.0;
  ScanConfig down = up;
  down.direction = ScanDirection::downward;

  const HysteresisResult h = hysteresis_scan(cavity, medium, up, down);
  const MultistabilityProbe probe = probe_multistability(cavity, medium, -2.0, -zeta + 3.0, 1e-3);

  CsvTable table;
  table.columns = {"direction", "t_s", "detuning_rad_s", "re_a", "im_a", "n", "P_trans_W"};
  for (const auto* t : {&h.up, &h.down}) {
    const std::string dir = t == &h.up ? "up" : "down";
    for (std::size_t i = 0; i < t->times.size(); ++i) {
      table.add_row({dir, num(t->times[i]), num(t->detuning[i]), num(t->field[i].real()),
                     num(t->field[i].imag()), num(t->photon_number[i]),
                     num(t->transmitted_power[i])});
    }
  }
  r.files.push_back({"figS2_scans.csv",
                     to_csv_text("figS2", "F=300, zeta=1.5 zeta_0, 100 tau per scan",
                                 "a in sqrt(photons), P in W", table)});

  CsvTable jumps;
  jumps.columns = {"direction", "time_s", "rise_time_s", "rise_time_over_tau", "amplitude_W"};
  for (const auto* t : {&h.up, &h.down}) {
    for (const auto& d : t->discontinuities) {
      jumps.add_row({t == &h.up ? "up" : "down", num(d.time), num(d.rise_time),
                     num(d.rise_time / tau), num(d.amplitude)});
    }
  }
  r.files.push_back({"figS2_jumps.csv", to_csv_text("figS2", "detected power steps", "s, W", jumps)});

  r.checks.push_back(flag_check("hysteretic", h.hysteretic,
                                "max |P_up - P_down| = " + num(h.max_difference) + " W"));
  r.checks.push_back(flag_check("three_steady_states", probe.found,
                                "discriminant maximum at xi0 = " +
                                    num(probe.bare_normalized_detuning)));
  const Discontinuity* up_jump = largest_jump(h.up);
  const double up_rise = up_jump ? up_jump->rise_time / tau : std::nan("");
  r.checks.push_back(make_check("upward_rise_time_over_tau", up_rise, 1.25, 0.75,
                                "abrupt drop within [tau/2, 2 tau]"));
  r.checks.push_back(flag_check("upward_drop", up_jump && up_jump->amplitude < 0.0,
                                "upward scan ends its bright branch with a fall"));
  const Discontinuity* down_jump = largest_jump(h.down);
  const double ratio = down_jump && up_jump ? down_jump->rise_time / up_jump->rise_time
                                            : std::numeric_limits<double>::infinity();
  r.checks.push_back(flag_check("downward_slower", ratio >= 1.5,
                                "downward rise / upward rise = " + num(ratio)));
  return r;
}

RecipeResult figS1(unsigned jobs) {
  RecipeResult r;
  r.recipe = "figS1";
  r.figure = "photothermal transfer and suspended-mirror susceptibility at xi = 1.09, 600 mW";

  const ModelConfig cfg = default_model_config();
  const SteadyState state = steady_state_at_normalized_detuning(cfg.cavity, cfg.medium, 1.09);
  const double fmin = 10.0;
  const double fmax = 7000.0;
  const auto omega = log_grid(2.0 * kPi * fmin, 2.0 * kPi * fmax, 300);
  const SpringResponse resp = spring_response(cfg.cavity, cfg.medium, state, omega, jobs);
  const double k_static = static_spring_constant(cfg.cavity, cfg.medium, state);
  const CompositeOscillator osc = composite_oscillator(cfg.mechanics, resp, k_static);

  CsvTable table;
  table.columns = {"f_Hz", "re_Kopt", "im_Kopt", "re_omega_th", "im_omega_th", "Hth_mag_db",
                   "Hth_phase_deg", "chi_mag_db", "chi_phase_deg", "outside_adiabatic"};
  bool flags_ok = true;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const BodePoint h = to_bode(resp.transfer[i]);
    const BodePoint x = to_bode(osc.susceptibility[i]);
    table.add_row({num(omega[i] / (2.0 * kPi)), num(resp.spring[i].real()),
                   num(resp.spring[i].imag()), num(resp.photothermal_rate[i].real()),
                   num(resp.photothermal_rate[i].imag()), num(h.magnitude_db), num(h.phase_deg),
                   num(x.magnitude_db), num(x.phase_deg),
                   resp.outside_adiabatic_regime[i] ? "1" : "0"});
    flags_ok = flags_ok && resp.outside_adiabatic_regime[i] ==
                               (omega[i] < cfg.medium.photothermal_relaxation);
  }
  r.files.push_back({"figS1_transfer.csv",
                     to_csv_text("figS1", "xi = " + num(state.normalized_detuning),
                                 "K in N/m, omega_th in rad/s, chi in m/N", table)});

  std::vector<PhotothermalSample> samples;
  for (std::size_t i = 0; i < omega.size(); ++i) samples.push_back({omega[i], resp.transfer[i]});
  const Complex k0 = complex_spring_constant(cfg.cavity, cfg.medium, state, 0.0);
  const RateShape shape = [&](double w) {
    return complex_spring_constant(cfg.cavity, cfg.medium, state, w) / k0;
  };
  const PhotothermalFit fit =
      fit_photothermal(samples, 2.0 * kPi * 100.0, 2.0 * kPi * 2000.0, shape);
  const double w_true = cfg.medium.photothermal_absorption * k0.real();

  r.checks.push_back(make_check("normalized_detuning", state.normalized_detuning, 1.09, 1e-9));
  r.checks.push_back(make_check("fit_gamma_th_relative", fit.gamma_th / cfg.medium.photothermal_relaxation,
                                1.0, 1e-6, "photothermal fit recovers gamma_th"));
  r.checks.push_back(make_check("fit_omega_th_relative", fit.omega_th_scale / w_true, 1.0, 1e-6,
                                "photothermal fit recovers omega_th(0) = d k_opt"));
  r.checks.push_back(make_check("fit_gain", fit.gain_normalization, 1.0, 1e-6));
  r.checks.push_back(flag_check("adiabatic_flags", flags_ok,
                                "flag set exactly where Omega < gamma_th"));
  r.checks.push_back(flag_check("composite_stable", !osc.resonance.anti_spring_unstable,
                                "composite resonance " +
                                    num(osc.resonance.angular_frequency / (2.0 * kPi)) + " Hz"));
  return r;
}

struct SeriesFits {
  std::vector<FitResult> fits;
  CriticalPowerEstimate critical;
};

std::vector<SeriesFits> fit_packaged(unsigned jobs) {
  const auto datasets = packaged_spring_datasets();
  std::vector<SeriesFits> out;
  for (const auto& series : packaged_series()) {
    SeriesFits sf;
    for (const auto& d : datasets) {
      if (d.temperature_label != series.temperature_label) continue;
      FitOptions opt;
      opt.jobs = jobs;
      sf.fits.push_back(fit_spring(d, opt));
    }
    sf.critical = amplification_vs_power(to_power_points(sf.fits));
    out.push_back(std::move(sf));
  }
  return out;
}

const FitResult* fit_at(const SeriesFits& s, double power) {
  for (const auto& f : s.fits) {
    if (std::abs(f.input_power - power) < 1e-12) return &f;
  }
  return nullptr;
}

RecipeResult fig3(unsigned jobs) {
  RecipeResult r;
  r.recipe = "fig3";
  r.figure = "static optical spring versus detuning at four input powers, two crystal temperatures";

  const auto datasets = packaged_spring_datasets();
  const auto series = packaged_series();
  const auto fitted = fit_packaged(jobs);

  r.files.push_back({"fig3_datasets.csv",
                     to_csv_text("fig3", "packaged synthetic spring datasets", "k in N/m, P0 in W",
                                 spring_datasets_table(datasets))});
  CsvTable fits;
  fits.columns = {"temp_label", "P0_W", "zeta", "zeta_err", "k_opt_0", "k_opt_0_err",
                  "A", "A_err", "chi2red"};
  CsvTable model;
  model.columns = {"temp_label", "P0_W", "xi", "k_model_N_per_m"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (const auto& f : fitted[s].fits) {
      fits.add_row({f.temperature_label, num(f.input_power), num(f.zeta), num(f.zeta_err),
                    num(f.k_opt_0), num(f.k_opt_0_err), num(f.amplification),
                    num(f.amplification_err), num(f.chi_squared_reduced)});
      for (double xi : linear_grid(0.05, 2.5, 200)) {
        model.add_row({f.temperature_label, num(f.input_power), num(xi),
                       num(model_k_opt(xi, f.zeta, f.k_opt_0))});
      }
      const double truth = kCriticalKerrGain * f.input_power / series[s].critical_power;
      r.checks.push_back(make_check(
          "zeta_" + f.temperature_label + "_" + num(f.input_power) + "W", f.zeta, truth,
          4.0 * f.zeta_err, "within 4 standard errors of the generating value"));
    }
  }
  r.files.push_back({"fig3_fits.csv", to_csv_text("fig3", "lossless Kerr fits", "k in N/m", fits)});
  r.files.push_back({"fig3_model.csv", to_csv_text("fig3", "fitted curves", "k in N/m", model)});

  const FitResult* hot = fit_at(fitted[1], kReferencePower);
  const FitResult* cold = fit_at(fitted[0], kReferencePower);
  const double kmax_cold = cold->amplification * cold->k_opt_0;
  const double kmax_hot = hot->amplification * hot->k_opt_0;
  r.checks.push_back(flag_check("stronger_kerr_spring_at_" + series[0].temperature_label,
                                kmax_cold > kmax_hot,
                                "max k at 600 mW: " + num(kmax_cold) + " vs " + num(kmax_hot)));
  bool all_physical = true;
  for (const auto& s : fitted) {
    for (const auto& f : s.fits) all_physical = all_physical && !f.unphysical_regime;
  }
  r.checks.push_back(flag_check("all_fits_physical", all_physical));
  return r;
}

RecipeResult fig4(unsigned jobs) {
  RecipeResult r;
  r.recipe = "fig4";
  r.figure = "net amplification ratio versus input power and critical-power extrapolation";

  const auto series = packaged_series();
  const auto fitted = fit_packaged(jobs);
  const FitResult* ref = fit_at(fitted[0], kReferencePower);

  CsvTable table;
  table.columns = {"temp_label", "P0_W", "zeta", "zeta_err", "A", "A_err", "net_amplification",
                   "net_amplification_err"};
  CsvTable model;
  model.columns = {"temp_label", "P0_W", "A_model"};
  CsvTable crit;
  crit.columns = {"temp_label", "slope_per_W", "slope_err_per_W", "P_crit_W", "P_crit_err_W"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (const auto& f : fitted[s].fits) {
      const double scale = f.k_opt_0 / (ref->k_opt_0 * f.input_power / kReferencePower);
      table.add_row({f.temperature_label, num(f.input_power), num(f.zeta), num(f.zeta_err),
                     num(f.amplification), num(f.amplification_err),
                     num(f.amplification * scale), num(f.amplification_err * scale)});
    }
    const auto& c = fitted[s].critical;
    crit.add_row({series[s].temperature_label, num(c.slope), num(c.slope_err),
                  num(c.critical_power), num(c.critical_power_err)});
    for (double p : linear_grid(0.0, 0.95 * c.critical_power, 100)) {
      model.add_row({series[s].temperature_label, num(p),
                     num(amplification_ratio(c.slope * p))});
    }
  }
  r.files.push_back({"fig4_amplification.csv",
                     to_csv_text("fig4", "per-power fits", "P0 in W", table)});
  r.files.push_back({"fig4_model.csv", to_csv_text("fig4", "A = 1/(1 - c P0/zeta_0)", "P0 in W", model)});
  r.files.push_back({"fig4_critical_power.csv",
                     to_csv_text("fig4", "zeta = c P0 extrapolated to zeta_0", "W", crit)});

  r.checks.push_back(make_check("A_" + series[0].temperature_label + "_600mW",
                                ref->amplification, 1.6, 0.1, "amplification at 600 mW"));
  r.checks.push_back(make_check("P_crit_" + series[0].temperature_label,
                                fitted[0].critical.critical_power, 1.56, 0.37,
                                "extrapolated critical power band"));
  r.checks.push_back(make_check("P_crit_" + series[1].temperature_label,
                                fitted[1].critical.critical_power, series[1].critical_power,
                                3.0 * fitted[1].critical.critical_power_err,
                                "within 3 standard errors of the generating value"));
  r.checks.push_back(flag_check("ordering", fitted[0].critical.critical_power <
                                                fitted[1].critical.critical_power,
                                "stronger Kerr gain diverges at lower power"));
  return r;
}

}  // namespace

bool RecipeResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const RecipeCheck& c) { return c.passed; });
}

Json RecipeResult::manifest() const {
  Json m;
  m["recipe"] = recipe;
  m["figure"] = figure;
  m["passed"] = passed();
  m["files"] = Json::array();
  for (const auto& f : files) m["files"].push_back(f.name);
  m["checks"] = Json::array();
  for (const auto& c : checks) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    m["checks"].push_back({{"name", c.name},
                           {"value", finite_or_null(c.value)},
                           {"expected", c.expected},
                           {"tolerance", c.tolerance},
                           {"passed", c.passed},
                           {"detail", c.detail}});
  }
  return m;
}

std::vector<std::string> recipe_names() { return {"fig1b", "fig3", "fig4", "figS1", "figS2"}; }

RecipeResult run_recipe(const std::string& name, unsigned jobs) {
  if (name == "fig1b") return fig1b(jobs);
  if (name == "fig3") return fig3(jobs);
  if (name == "fig4") return fig4(jobs);
  if (name == "figS1") return figS1(jobs);
  if (name == "figS2") return figS2(jobs);
  throw Error(ErrorKind::configuration, "unknown recipe '" + name + "'");
}

std::vector<SpringSeriesSpec> packaged_series() { return {{"39.6C", 1.56}, {"45.4C", 2.65}}; }

double reference_linear_spring() {
  const double composite = 2.0 * kPi * 53.0;
  const double mech = 2.0 * kPi * 14.0;
  return default_model_config().mechanics.mass * (composite * composite - mech * mech);
}

std::vector<SpringDataset> packaged_spring_datasets() {
  std::vector<SpringDataset> out;
  const auto series = packaged_series();
  const double powers[] = {0.6, 0.45, 0.3, 0.15};
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t p = 0; p < std::size(powers); ++p) {
      SyntheticSpringParams params;
      params.zeta = kCriticalKerrGain * powers[p] / series[s].critical_power;
      params.k_opt_0 = reference_linear_spring() * powers[p] / kReferencePower;
      params.input_power = powers[p];
      params.temperature_label = series[s].temperature_label;
      params.xi = default_detuning_grid(kPackagedPoints);
      out.push_back(synthesize_dataset(params, kPackagedNoise,
                                       derive_seed(kPackagedSeed, 16 * s + p)));
    }
  }
  return out;
}

}  // namespace kerrspring
