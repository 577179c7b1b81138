#include "kerrspring/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kerrspring/constants.hpp"
#include "kerrspring/dynamics.hpp"
#include "kerrspring/errors.hpp"
#include "kerrspring/estimation.hpp"
#include "kerrspring/interferometer.hpp"
#include "kerrspring/io.hpp"
#include "kerrspring/parallel.hpp"
#include "kerrspring/recipes.hpp"
#include "kerrspring/response.hpp"
#include "kerrspring/steady_state.hpp"

namespace kerrspring::cli {

namespace {

struct Range {
  double low = 0.0;
  double high = 0.0;
};

Range parse_range(const std::string& text, const std::string& what) {
  const auto sep = text.find("..", 1);
  if (sep == std::string::npos) {
    throw Error(ErrorKind::configuration, what + " must look like a..b, got '" + text + "'");
  }
  auto number = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw Error(ErrorKind::configuration, what + ": bad number '" + s + "'");
    }
    return v;
  };
  Range r{number(text.substr(0, sep)), number(text.substr(sep + 2))};
  if (!(r.low < r.high)) throw Error(ErrorKind::configuration, what + " needs a < b");
  return r;
}

unsigned default_jobs() {
  const char* env = std::getenv("KERRSPRING_JOBS");
  if (!env || !*env) return 1;
  unsigned v = 0;
  const std::string s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw Error(ErrorKind::configuration, "KERRSPRING_JOBS must be a positive integer");
  }
  return v;
}

std::string num(double v) { return format_number(v); }

struct Globals {
  std::string params;
  std::string output;
  std::string format = "csv";
  unsigned jobs = 1;
  std::uint64_t seed = 0;
};

// Table output plus optional structured data for JSON runs.
struct Result {
  std::string units;
  CsvTable table;
  std::vector<std::string> notes;  // extra CSV header lines
  std::optional<Json> data;        // replaces the table in JSON output
  Json checks = Json::array();
};

Json table_to_json(const CsvTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < table.columns.size() && i < row.size(); ++i) {
      double v = 0.0;
      const auto& s = row[i];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec == std::errc() && ptr == s.data() + s.size()) {
        obj[table.columns[i]] = std::isfinite(v) ? Json(v) : Json(nullptr);
      } else {
        obj[table.columns[i]] = s;
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

void emit(const Globals& g, const std::string& subcommand, const Json& config,
          const Result& result, std::ostream& stdout_stream) {
  std::ofstream file;
  std::ostream* out = &stdout_stream;
  if (!g.output.empty()) {
    file.open(g.output, std::ios::binary);
    if (!file) throw Error(ErrorKind::configuration, "cannot open output file '" + g.output + "'");
    out = &file;
  }
  const std::string hash = config_hash(config);
  if (g.format == "json") {
    Json doc;
    doc["config"] = config;
    doc["config_hash"] = hash;
    doc["data"] = result.data ? *result.data : table_to_json(result.table);
    doc["checks"] = result.checks;
    *out << doc.dump(2) << '\n';
  } else {
    std::vector<std::string> header = {"kerrspring " + subcommand, "config: " + config.dump(),
                                       "config_hash: " + hash, "units: " + result.units};
    header.insert(header.end(), result.notes.begin(), result.notes.end());
    write_csv(*out, header, result.table);
  }
  out->flush();
  if (!*out) throw Error(ErrorKind::configuration, "failed writing output");
}

// --zeta sets the Kerr gain of the normalized cubic, zeta * gamma_in / gamma'.
// A pure Kerr medium is assumed unless --shg-loss is also given.
void apply_gain_overrides(ModelConfig& cfg, const std::optional<double>& zeta,
                          const std::optional<double>& shg_loss) {
  if (zeta) {
    const double g = cfg.cavity.linear_decay();
    cfg.medium.kerr_susceptibility = susceptibility_for_kerr_gain(
        *zeta * g / cfg.cavity.input_decay, cfg.cavity.input_power, g,
        cfg.cavity.carrier_angular_frequency);
    cfg.medium.shg_loss = 0.0;
  }
  if (shg_loss) cfg.medium.shg_loss = *shg_loss;
  validate(cfg.medium);
}

Result run_steady(const ModelConfig& cfg, double xi0) {
  const auto& c = cfg.cavity;
  const double pmax = derive_rates(c, cfg.medium, 0.0).resonant_power;
  Result r;
  r.units = "n_bar in photons, P in W, rates in rad/s";
  r.table.columns = {"xi0", "branch_index", "n_bar", "P_W", "P_over_Pmax", "xi",
                     "delta_rad_s", "gamma_rad_s", "stable", "re_lambda_1", "re_lambda_2"};
  const auto states = solve_steady_states(c, cfg.medium, xi0 * c.linear_decay());
  for (std::size_t b = 0; b < states.size(); ++b) {
    const auto& s = states[b];
    r.table.add_row({num(xi0), std::to_string(b), num(s.photon_number), num(s.intracavity_power),
                     num(s.intracavity_power / pmax), num(s.normalized_detuning),
                     num(s.effective_detuning), num(s.effective_decay), s.stable() ? "1" : "0",
                     num(s.eigenvalues[0].real()), num(s.eigenvalues[1].real())});
  }
  return r;
}

Result run_curve(const ModelConfig& cfg, Range xi0, std::size_t count, unsigned jobs) {
  const auto grid = linear_grid(xi0.low, xi0.high, count);
  const PowerCurve curve = power_curve(cfg.cavity, cfg.medium, grid, jobs);
  Result r;
  r.units = "n_bar in photons; P normalized by the linear resonant power " +
            num(curve.resonant_power) + " W";
  r.table.columns = {"xi0", "branch_index", "n_bar", "P_over_Pmax", "xi", "stable"};
  for (const auto& pt : curve.points) {
    if (pt.error) {
      r.notes.push_back("solver_error xi0=" + num(pt.bare_normalized_detuning) + ": " + *pt.error);
      continue;
    }
    for (std::size_t b = 0; b < pt.branches.size(); ++b) {
      const auto& s = pt.branches[b];
      r.table.add_row({num(pt.bare_normalized_detuning), std::to_string(b), num(s.photon_number),
                       num(s.intracavity_power / curve.resonant_power),
                       num(s.normalized_detuning), s.stable() ? "1" : "0"});
    }
  }
  return r;
}

Result run_spring(const ModelConfig& cfg, Range xi, std::size_t count, double omega,
                  unsigned jobs) {
  const auto grid = linear_grid(xi.low, xi.high, count);
  std::vector<std::vector<std::string>> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const SteadyState s = steady_state_at_normalized_detuning(cfg.cavity, cfg.medium, grid[i]);
    const double k = static_spring_constant(cfg.cavity, cfg.medium, s);
    const Complex kw = complex_spring_constant(cfg.cavity, cfg.medium, s, omega);
    rows[i] = {num(grid[i]), num(s.photon_number), num(s.intracavity_power), num(k),
               num(kw.real()), num(kw.imag()), num(s.kerr_detuning(cfg.medium))};
  });
  Result r;
  r.units = "k in N/m, P in W, K_opt evaluated at omega = " + num(omega) + " rad/s";
  r.table.columns = {"xi", "n_bar", "P_W", "k_opt_N_per_m", "re_Kopt", "im_Kopt", "xi_K"};
  for (auto& row : rows) r.table.add_row(std::move(row));
  return r;
}

Result run_response(const ModelConfig& cfg, double xi, Range freq, std::size_t count,
                    bool linear, bool bode, unsigned jobs) {
  const SteadyState s = steady_state_at_normalized_detuning(cfg.cavity, cfg.medium, xi);
  const auto omega = linear ? linear_grid(2.0 * kPi * freq.low, 2.0 * kPi * freq.high, count)
                            : log_grid(2.0 * kPi * freq.low, 2.0 * kPi * freq.high, count);
  const SpringResponse resp = spring_response(cfg.cavity, cfg.medium, s, omega, jobs);
  const double k_static = static_spring_constant(cfg.cavity, cfg.medium, s);
  const CompositeOscillator osc = composite_oscillator(cfg.mechanics, resp, k_static);

  Result r;
  r.units = "omega in rad/s, K in N/m, omega_th in rad/s, H_th dimensionless, chi in m/N";
  r.notes.push_back("static_spring_N_per_m: " + num(k_static));
  r.notes.push_back("composite_resonance_Hz: " +
                    num(osc.resonance.angular_frequency / (2.0 * kPi)) +
                    (osc.resonance.anti_spring_unstable ? " (anti-spring unstable)" : ""));
  r.table.columns = {"omega_rad_s", "re_Kopt", "im_Kopt", "re_omega_th", "im_omega_th",
                     "re_Hth", "im_Hth", "outside_adiabatic"};
  if (bode) {
    for (const char* c : {"Kopt_mag_db", "Kopt_phase_deg", "Hth_mag_db", "Hth_phase_deg",
                          "chi_mag_db", "chi_phase_deg"}) {
      r.table.columns.push_back(c);
    }
  }
  for (std::size_t i = 0; i < omega.size(); ++i) {
    std::vector<std::string> row = {
        num(omega[i]), num(resp.spring[i].real()), num(resp.spring[i].imag()),
        num(resp.photothermal_rate[i].real()), num(resp.photothermal_rate[i].imag()),
        num(resp.transfer[i].real()), num(resp.transfer[i].imag()),
        resp.outside_adiabatic_regime[i] ? "1" : "0"};
    if (bode) {
      for (const Complex v : {resp.spring[i], resp.transfer[i], osc.susceptibility[i]}) {
        const BodePoint b = to_bode(v);
        row.push_back(num(b.magnitude_db));
        row.push_back(num(b.phase_deg));
      }
    }
    r.table.add_row(std::move(row));
  }
  return r;
}

Json trajectory_json(const Trajectory& t, const std::string& direction) {
  Json j;
  j["direction"] = direction;
  j["charging_time_s"] = t.charging_time;
  j["resonant_power_W"] = t.resonant_power;
  j["t_s"] = t.times;
  j["detuning_rad_s"] = t.detuning;
  std::vector<double> re;
  std::vector<double> im;
  for (const auto& a : t.field) {
    re.push_back(a.real());
    im.push_back(a.imag());
  }
  j["re_a"] = re;
  j["im_a"] = im;
  j["n"] = t.photon_number;
  j["P_trans_W"] = t.transmitted_power;
  j["discontinuities"] = Json::array();
  for (const auto& d : t.discontinuities) {
    j["discontinuities"].push_back(
        {{"time_s", d.time}, {"rise_time_s", d.rise_time}, {"amplitude_W", d.amplitude}});
  }
  return j;
}

Result run_scan(const ModelConfig& cfg, Range xi0, const std::string& direction,
                double charging_times, double record_tau, bool photothermal) {
  const double g = cfg.cavity.linear_decay();
  const double tau = 2.0 * kPi / g;
  ScanConfig base;
  base.detuning_low = xi0.low * g;
  base.detuning_high = xi0.high * g;
  base.scan_rate = scan_rate_for(cfg.cavity, base.detuning_low, base.detuning_high, charging_times);
  base.record_interval = record_tau * tau;
  base.include_photothermal = photothermal;

  std::vector<std::pair<std::string, Trajectory>> runs;
  Result r;
  if (direction == "both") {
    ScanConfig up = base;
    ScanConfig down = base;
    down.direction = ScanDirection::downward;
    HysteresisResult h = hysteresis_scan(cfg.cavity, cfg.medium, up, down);
    r.notes.push_back("hysteretic: " + std::string(h.hysteretic ? "true" : "false"));
    r.notes.push_back("max_difference_W: " + num(h.max_difference));
    r.notes.push_back("loop_area_W_rad_s: " + num(h.loop_area));
    r.checks.push_back({{"name", "hysteretic"}, {"value", h.hysteretic}});
    runs.emplace_back("up", std::move(h.up));
    runs.emplace_back("down", std::move(h.down));
  } else {
    base.direction = direction == "up" ? ScanDirection::upward : ScanDirection::downward;
    runs.emplace_back(direction, scan(cfg.cavity, cfg.medium, base));
  }

  r.units = "t in s, detuning in rad/s, a in sqrt(photons), P in W; tau = " + num(tau) + " s";
  r.table.columns = {"direction", "t_s", "detuning_rad_s", "re_a", "im_a", "n", "P_trans_W"};
  Json data = Json::array();
  for (const auto& [dir, t] : runs) {
    for (const auto& d : t.discontinuities) {
      r.notes.push_back("jump direction=" + dir + " t_s=" + num(d.time) +
                        " rise_time_over_tau=" + num(d.rise_time / tau) +
                        " amplitude_W=" + num(d.amplitude));
    }
    for (std::size_t i = 0; i < t.times.size(); ++i) {
      r.table.add_row({dir, num(t.times[i]), num(t.detuning[i]), num(t.field[i].real()),
                       num(t.field[i].imag()), num(t.photon_number[i]),
                       num(t.transmitted_power[i])});
    }
    data.push_back(trajectory_json(t, dir));
  }
  r.data = Json{{"trajectories", data}};
  return r;
}

Result run_fit(const std::vector<SpringDataset>& datasets, std::size_t bootstrap,
               std::uint64_t seed, unsigned jobs) {
  Result r;
  r.units = "k in N/m, P0 in W, zeta dimensionless";
  r.table.columns = {"temp_label", "P0_W", "zeta", "zeta_err", "k_opt_0", "k_opt_0_err",
                     "A", "A_err", "chi2red", "unphysical_regime", "low_detuning_points"};
  std::vector<FitResult> fits;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    FitOptions opt;
    opt.bootstrap_samples = bootstrap;
    opt.seed = derive_seed(seed, i);
    opt.jobs = jobs;
    fits.push_back(fit_spring(datasets[i], opt));
    const auto& f = fits.back();
    r.table.add_row({f.temperature_label, num(f.input_power), num(f.zeta), num(f.zeta_err),
                     num(f.k_opt_0), num(f.k_opt_0_err), num(f.amplification),
                     num(f.amplification_err), num(f.chi_squared_reduced),
                     f.unphysical_regime ? "1" : "0",
                     std::to_string(f.low_detuning_points.size())});
  }

  // Critical power per temperature label with at least three distinct powers.
  Json critical = Json::array();
  std::vector<std::string> labels;
  for (const auto& f : fits) {
    if (std::find(labels.begin(), labels.end(), f.temperature_label) == labels.end()) {
      labels.push_back(f.temperature_label);
    }
  }
  for (const auto& label : labels) {
    std::vector<FitResult> group;
    for (const auto& f : fits) {
      if (f.temperature_label == label) group.push_back(f);
    }
    std::vector<double> powers;
    for (const auto& f : group) {
      if (std::find(powers.begin(), powers.end(), f.input_power) == powers.end()) {
        powers.push_back(f.input_power);
      }
    }
    if (powers.size() < 3) continue;
    try {
      const auto est = amplification_vs_power(to_power_points(group));
      critical.push_back({{"temp_label", label},
                          {"slope_per_W", est.slope},
                          {"slope_err_per_W", est.slope_err},
                          {"P_crit_W", est.critical_power},
                          {"P_crit_err_W", est.critical_power_err}});
      r.notes.push_back("critical_power temp_label=" + label + " P_crit_W=" +
                        num(est.critical_power) + " P_crit_err_W=" + num(est.critical_power_err));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_divergence) throw;
      critical.push_back({{"temp_label", label}, {"P_crit_W", nullptr}, {"note", e.what()}});
      r.notes.push_back("critical_power temp_label=" + label + " none: " + e.what());
    }
  }

  Json fit_json = Json::array();
  for (const auto& f : fits) fit_json.push_back(to_json(f));
  r.data = Json{{"datasets", spring_datasets_json(datasets)},
                {"fits", fit_json},
                {"critical_power", critical}};
  return r;
}

Json complex_json(std::complex<double> v) { return Json::array({v.real(), v.imag()}); }

Result run_gwd(const ModelConfig& cfg, Range freq, std::size_t count,
               const std::optional<std::string>& phi_sweep, std::size_t sweep_count) {
  Result r;
  if (phi_sweep) {
    const Range phi = parse_range(*phi_sweep, "--phi");
    r.units = "phases in rad, k in N/m";
    r.table.columns = {"phi_rad", "Phi_rad", "k_opt_N_per_m", "k_opt_approx_N_per_m"};
    for (double p : linear_grid(phi.low, phi.high, sweep_count)) {
      MichelsonParams m = cfg.michelson;
      m.detune_phase = p;
      try {
        const MichelsonSpring s = michelson_spring_constant(m);
        r.table.add_row({num(p), num(m.kerr_phase), num(s.exact), num(s.approximate)});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::divergent_spring) throw;
        r.table.add_row({num(p), num(m.kerr_phase), "inf", "inf"});
      }
    }
    return r;
  }
  const auto omega = log_grid(2.0 * kPi * freq.low, 2.0 * kPi * freq.high, count);
  r.units = "omega in rad/s; M, A, H dimensionless complex";
  r.table.columns = {"omega_rad_s", "M_re", "M_im"};
  for (const char* a : {"A11", "A12", "A21", "A22", "H12", "H22"}) {
    r.table.columns.push_back(std::string(a) + "_re");
    r.table.columns.push_back(std::string(a) + "_im");
  }
  Json data = Json::array();
  for (double w : omega) {
    const TwoPhotonResponse t = interferometer_response(cfg.michelson, w);
    std::vector<std::string> row = {num(w), num(t.M.real()), num(t.M.imag())};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        row.push_back(num(t.A(i, j).real()));
        row.push_back(num(t.A(i, j).imag()));
      }
    }
    const auto h = t.signal();
    for (int i = 0; i < 2; ++i) {
      row.push_back(num(h(i).real()));
      row.push_back(num(h(i).imag()));
    }
    r.table.add_row(std::move(row));
    data.push_back({{"omega", w},
                    {"M_re", t.M.real()},
                    {"M_im", t.M.imag()},
                    {"A", {{complex_json(t.A(0, 0)), complex_json(t.A(0, 1))},
                           {complex_json(t.A(1, 0)), complex_json(t.A(1, 1))}}},
                    {"H", {complex_json(h(0)), complex_json(h(1))}}});
  }
  r.data = data;
  return r;
}

int run_reproduce(const std::string& recipe, const std::string& dir, unsigned jobs,
                  std::ostream& out, std::ostream& err) {
  const RecipeResult result = run_recipe(recipe, jobs);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::configuration, "cannot create '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorKind::configuration, "cannot write '" + path.string() + "'");
  };
  for (const auto& f : result.files) write(f.name, f.content);
  write(recipe + "_manifest.json", result.manifest().dump(2) + "\n");

  for (const auto& c : result.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << recipe << ' ' << c.name << " value=" << num(c.value)
        << " expected=" << num(c.expected) << " tolerance=" << num(c.tolerance) << '\n';
  }
  if (result.passed()) return exit_ok;
  for (const auto& c : result.checks) {
    if (c.passed) continue;
    err << "check " << recipe << '/' << c.name << ": got " << num(c.value) << ", expected "
        << num(c.expected) << " +/- " << num(c.tolerance) << ", off by "
        << num(std::abs(c.value - c.expected)) << (c.detail.empty() ? "" : " (" + c.detail + ")")
        << '\n';
  }
  return exit_check_failed;
}

int code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::invalid_parameter:
      return exit_config;
    default:
      return exit_numerical;
  }
}

void report(std::ostream& err, int code, std::string_view kind, const std::string& message) {
  const Json record = {{"code", code}, {"kind", kind}, {"message", message}};
  err << "error " << record.dump() << '\n';
  err << "kerrspring: " << kind << ": " << message << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kerr-enhanced optical spring toolkit", "kerrspring"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::optional<unsigned> jobs_flag;
  app.add_option("--params", g.params, "JSON params file overlaid on the defaults");
  app.add_option("-o,--output", g.output, "output file (default stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", jobs_flag, "worker threads (default $KERRSPRING_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "root random seed");

  std::optional<double> zeta;
  std::optional<double> shg_loss;
  auto add_gain = [&](CLI::App* sub) {
    sub->add_option("--zeta", zeta,
                    "Kerr gain of the normalized cubic (zeta gamma_in / gamma'); zeroes the SHG "
                    "loss unless --shg-loss is given");
    sub->add_option("--shg-loss", shg_loss, "SHG loss coefficient beta [rad/s per photon]");
  };

  double steady_xi0 = 0.0;
  auto* steady = app.add_subcommand("steady", "steady states at one bare detuning");
  steady->add_option("--xi0", steady_xi0, "bare detuning Delta'/gamma'");
  add_gain(steady);

  std::string curve_range = "-4..4";
  std::size_t curve_count = 801;
  auto* curve = app.add_subcommand("curve", "intracavity power versus bare detuning");
  curve->add_option("--xi0", curve_range, "bare detuning range a..b");
  curve->add_option("--count", curve_count, "grid points")->check(CLI::Range(2, 10000000));
  add_gain(curve);

  std::string spring_range = "0.3..2";
  std::size_t spring_count = 50;
  double spring_omega = 0.0;
  auto* spring = app.add_subcommand("spring", "optical spring versus normalized detuning");
  spring->add_option("--xi", spring_range, "normalized detuning range a..b");
  spring->add_option("--count", spring_count, "grid points")->check(CLI::Range(2, 10000000));
  spring->add_option("--omega", spring_omega, "sideband frequency for K_opt [rad/s]")
      ->check(CLI::NonNegativeNumber);
  add_gain(spring);

  double response_xi = kOptimalDetuning;
  std::string response_freq = "10..7000";
  std::size_t response_count = 200;
  bool response_linear = false;
  bool response_bode = false;
  auto* response = app.add_subcommand("response", "frequency response at one detuning");
  response->add_option("--xi", response_xi, "normalized detuning");
  response->add_option("--freq", response_freq, "frequency range a..b [Hz]");
  response->add_option("--count", response_count, "grid points")->check(CLI::Range(2, 10000000));
  response->add_flag("--linear", response_linear, "linear instead of log spacing");
  response->add_flag("--bode", response_bode, "add magnitude/phase columns");
  add_gain(response);

  std::string scan_range = "-2..4";
  std::string scan_direction = "both";
  double scan_charging = 100.0;
  double scan_record = 0.02;
  bool scan_photothermal = false;
  std::optional<double> scan_finesse;
  auto* scan_cmd = app.add_subcommand("scan", "time-domain cavity length scan");
  scan_cmd->add_option("--xi0", scan_range, "bare detuning window a..b");
  scan_cmd->add_option("--direction", scan_direction, "up, down or both")
      ->check(CLI::IsMember({"up", "down", "both"}));
  scan_cmd->add_option("--charging-times", scan_charging, "scan duration in units of tau")
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--record-every", scan_record, "sampling interval in units of tau")
      ->check(CLI::NonNegativeNumber);
  scan_cmd->add_flag("--photothermal", scan_photothermal, "couple the photothermal state");
  scan_cmd->add_option("--finesse", scan_finesse, "lossless cavity of this finesse")
      ->check(CLI::PositiveNumber);
  add_gain(scan_cmd);

  std::string fit_input;
  bool fit_synth = false;
  double synth_zeta = 0.375 * kCriticalKerrGain;
  double synth_k0 = 1.0;
  double synth_noise = 0.03;
  std::size_t synth_points = 12;
  double synth_power = 0.6;
  std::string synth_label = "synthetic";
  std::size_t fit_bootstrap = 0;
  auto* fit = app.add_subcommand("fit", "fit the lossless Kerr spring model");
  fit->add_option("--input", fit_input, "CSV or JSON datasets");
  fit->add_flag("--synthesize", fit_synth, "fit a synthetic dataset instead of --input");
  fit->add_option("--zeta", synth_zeta, "synthetic Kerr gain");
  fit->add_option("--k0", synth_k0, "synthetic k_opt_0 [N/m]");
  fit->add_option("--noise", synth_noise, "synthetic relative noise")->check(CLI::Range(0.0, 0.5));
  fit->add_option("--points", synth_points, "synthetic points")->check(CLI::Range(4, 100000));
  fit->add_option("--power", synth_power, "synthetic P0 [W]");
  fit->add_option("--label", synth_label, "synthetic temperature label");
  fit->add_option("--bootstrap", fit_bootstrap, "bootstrap resamples (0 disables)");

  std::string gwd_freq = "10..10000";
  std::size_t gwd_count = 50;
  std::optional<std::string> gwd_phi;
  std::size_t gwd_sweep_count = 101;
  std::optional<double> gwd_kerr_phase;
  auto* gwd = app.add_subcommand("gwd", "Kerr-loaded signal-recycled Michelson");
  gwd->add_option("--freq", gwd_freq, "sideband frequency range a..b [Hz]");
  gwd->add_option("--count", gwd_count, "grid points")->check(CLI::Range(2, 10000000));
  gwd->add_option("--phi", gwd_phi, "sweep the detune phase over a..b instead");
  gwd->add_option("--sweep-count", gwd_sweep_count, "sweep points")->check(CLI::Range(2, 10000000));
  gwd->add_option("--kerr-phase", gwd_kerr_phase, "override Phi [rad]");

  std::string recipe;
  std::string recipe_dir = ".";
  auto* reproduce = app.add_subcommand("reproduce", "regenerate a figure dataset with checks");
  reproduce->add_option("recipe", recipe, "fig1b, fig3, fig4, figS1 or figS2")->required();
  reproduce->add_option("--output-dir", recipe_dir, "directory for the artifacts");

  std::vector<const char*> argv = {"kerrspring"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e, out, err);
      report(err, exit_config, "usage", e.what());
      return exit_config;
    }
    g.jobs = jobs_flag ? *jobs_flag : default_jobs();
    ModelConfig cfg = g.params.empty() ? default_model_config() : load_model_config(g.params);

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Json options = Json::object();
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
      if (opt->count() == 0 && opt->get_default_str().empty()) continue;
      const auto values = opt->results();
      std::string key = opt->get_name();
      while (!key.empty() && key.front() == '-') key.erase(0, 1);
      options[key] = values.empty() ? opt->get_default_str() : values.back();
    }

    if (name == "reproduce") {
      return run_reproduce(recipe, recipe_dir, g.jobs, out, err);
    }

    Result result;
    if (name == "steady") {
      apply_gain_overrides(cfg, zeta, shg_loss);
      result = run_steady(cfg, steady_xi0);
    } else if (name == "curve") {
      apply_gain_overrides(cfg, zeta, shg_loss);
      result = run_curve(cfg, parse_range(curve_range, "--xi0"), curve_count, g.jobs);
    } else if (name == "spring") {
      apply_gain_overrides(cfg, zeta, shg_loss);
      result = run_spring(cfg, parse_range(spring_range, "--xi"), spring_count, spring_omega,
                          g.jobs);
    } else if (name == "response") {
      apply_gain_overrides(cfg, zeta, shg_loss);
      result = run_response(cfg, response_xi, parse_range(response_freq, "--freq"),
                            response_count, response_linear, response_bode, g.jobs);
    } else if (name == "scan") {
      if (scan_finesse) {
        cfg.cavity.input_decay = decay_for_finesse(cfg.cavity.half_cycle_length, *scan_finesse);
        cfg.cavity.other_loss_decay = 0.0;
      }
      apply_gain_overrides(cfg, zeta, shg_loss);
      result = run_scan(cfg, parse_range(scan_range, "--xi0"), scan_direction, scan_charging,
                        scan_record, scan_photothermal);
    } else if (name == "fit") {
      std::vector<SpringDataset> datasets;
      if (fit_synth == !fit_input.empty()) {
        throw Error(ErrorKind::configuration, "fit needs exactly one of --input or --synthesize");
      }
      if (fit_synth) {
        SyntheticSpringParams p;
        p.zeta = synth_zeta;
        p.k_opt_0 = synth_k0;
        p.input_power = synth_power;
        p.temperature_label = synth_label;
        p.xi = default_detuning_grid(synth_points);
        datasets.push_back(synthesize_dataset(p, synth_noise, g.seed));
      } else {
        datasets = read_spring_datasets(fit_input);
      }
      result = run_fit(datasets, fit_bootstrap, g.seed, g.jobs);
    } else if (name == "gwd") {
      if (gwd_kerr_phase) cfg.michelson.kerr_phase = *gwd_kerr_phase;
      result = run_gwd(cfg, parse_range(gwd_freq, "--freq"), gwd_count, gwd_phi, gwd_sweep_count);
    }

    Json config;
    config["tool"] = "kerrspring";
    config["subcommand"] = name;
    config["options"] = options;
    config["seed"] = g.seed;
    config["params"] = to_json(cfg);
    emit(g, name, config, result, out);
    return exit_ok;
  } catch (const Error& e) {
    const int code = code_for(e.kind());
    report(err, code, to_string(e.kind()), e.what());
    return code;
  } catch (const Json::exception& e) {
    report(err, exit_config, "configuration", e.what());
    return exit_config;
  } catch (const std::exception& e) {
    report(err, exit_numerical, "internal", e.what());
    return exit_numerical;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace kerrspring::cli
