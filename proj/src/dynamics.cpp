#include "kerrspring/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kerrspring/errors.hpp"
#include "kerrspring/steady_state.hpp"

namespace kerrspring {

namespace {

using Field = std::complex<double>;

struct State {
  Field a;
  double x = 0.0;  // photothermal displacement
};

struct Rhs {
  double chi, beta, gamma_lin, drive, coupling, gamma_th, pt_gain;
  bool photothermal;

  State operator()(const State& s, double detuning) const {
    const double n = std::norm(s.a);
    const double delta = detuning + (photothermal ? coupling * s.x : 0.0) - chi * n;
    State d;
    d.a = Field(-(gamma_lin + beta * n), delta) * s.a + drive;
    d.x = photothermal ? -gamma_th * s.x + pt_gain * n : 0.0;
    return d;
  }
};

State axpy(const State& s, double h, const State& d) { return {s.a + h * d.a, s.x + h * d.x}; }

double interpolate_time(double t0, double p0, double t1, double p1, double level) {
  if (p1 == p0) return t0;
  return t0 + (level - p0) / (p1 - p0) * (t1 - t0);
}

// Linear interpolation of a curve sampled at increasing abscissae.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

}  // namespace

double max_decay_rate(const CavityParams& cavity, const KerrMediumParams& medium) {
  const double g = cavity.linear_decay();
  return g + medium.shg_loss * cavity.drive_strength() / (g * g);
}

double max_time_step(const CavityParams& cavity, const KerrMediumParams& medium) {
  return 0.01 * 2.0 * kPi / max_decay_rate(cavity, medium);
}

double resonant_amplitude(const CavityParams& cavity) {
  return std::sqrt(2.0 * cavity.input_decay * cavity.input_photon_rate()) /
         cavity.linear_decay();
}

Trajectory integrate_field(const CavityParams& cavity, const KerrMediumParams& medium,
                           const DetuningSchedule& schedule, std::complex<double> initial_field,
                           const IntegrationOptions& options) {
  validate(cavity);
  validate(medium);
  require_finite(initial_field.real(), "initial field");
  require_finite(initial_field.imag(), "initial field");
  if (!(options.duration > 0.0) || !std::isfinite(options.duration)) {
    throw Error(ErrorKind::configuration, "integration duration must be positive");
  }
  const double h_max = max_time_step(cavity, medium);
  double h = options.time_step == 0.0 ? h_max : options.time_step;
  if (!(h > 0.0) || h > h_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << h << " s exceeds 0.01 * 2 pi / gamma_max = " << h_max << " s";
    throw Error(ErrorKind::configuration, msg.str());
  }
  const auto steps = static_cast<std::size_t>(std::ceil(options.duration / h - 1e-9));
  h = options.duration / static_cast<double>(steps);

  const double g = cavity.optomech_coupling;
  const Rhs rhs{medium.kerr_susceptibility,
                medium.shg_loss,
                cavity.linear_decay(),
                std::sqrt(2.0 * cavity.input_decay * cavity.input_photon_rate()),
                g,
                medium.photothermal_relaxation,
                medium.photothermal_absorption * kHbar * g,
                options.include_photothermal};

  State s{initial_field, 0.0};
  if (options.include_photothermal) {
    s.x = std::isnan(options.initial_displacement)
              ? rhs.pt_gain * std::norm(initial_field) / rhs.gamma_th
              : options.initial_displacement;
  }

  Trajectory traj;
  traj.resonant_power = derive_rates(cavity, medium, 0.0).resonant_power;
  traj.charging_time = 2.0 * kPi / cavity.linear_decay();
  const double per_photon = cavity.power_per_photon();
  const std::size_t stride =
      options.record_interval > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(options.record_interval / h))
          : 1;
  const std::size_t reserve = steps / stride + 2;
  traj.times.reserve(reserve);
  traj.detuning.reserve(reserve);
  traj.field.reserve(reserve);
  traj.photon_number.reserve(reserve);
  traj.transmitted_power.reserve(reserve);

  auto record = [&](double t, const State& st) {
    const double n = std::norm(st.a);
    traj.times.push_back(t);
    traj.detuning.push_back(schedule(t));
    traj.field.push_back(st.a);
    traj.photon_number.push_back(n);
    traj.transmitted_power.push_back(per_photon * n);
  };

  record(0.0, s);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = h * static_cast<double>(k);
    const double d0 = schedule(t);
    const double d1 = schedule(t + 0.5 * h);
    const double d2 = schedule(t + h);
    const State k1 = rhs(s, d0);
    const State k2 = rhs(axpy(s, 0.5 * h, k1), d1);
    const State k3 = rhs(axpy(s, 0.5 * h, k2), d1);
    const State k4 = rhs(axpy(s, h, k3), d2);
    State next;
    next.a = s.a + (h / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    next.x = s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    if (!std::isfinite(next.a.real()) || !std::isfinite(next.a.imag()) ||
        !std::isfinite(next.x)) {
      std::ostringstream msg;
      msg << "field integration diverged; last good time " << t << " s";
      throw Error(ErrorKind::instability, msg.str());
    }
    s = next;
    if ((k + 1) % stride == 0 || k + 1 == steps) record(t + h, s);
  }
  return traj;
}

double scan_rate_for(const CavityParams& cavity, double detuning_low, double detuning_high,
                     double charging_times) {
  const double tau = 2.0 * kPi / cavity.linear_decay();
  return (detuning_high - detuning_low) / (charging_times * tau);
}

Trajectory scan(const CavityParams& cavity, const KerrMediumParams& medium,
                const ScanConfig& config) {
  validate(cavity);
  validate(medium);
  require_finite(config.detuning_low, "detuning_low");
  require_finite(config.detuning_high, "detuning_high");
  if (config.detuning_high - config.detuning_low < 2.0 * cavity.linear_decay()) {
    throw Error(ErrorKind::configuration, "scan window must cover at least one linewidth");
  }
  if (!(config.scan_rate > 0.0) || !std::isfinite(config.scan_rate)) {
    throw Error(ErrorKind::configuration, "scan rate must be positive");
  }
  const bool up = config.direction == ScanDirection::upward;
  const double start = up ? config.detuning_low : config.detuning_high;
  const double sign = up ? 1.0 : -1.0;
  const double rate = config.scan_rate;
  const DetuningSchedule schedule = [=](double t) { return start + sign * rate * t; };

  const auto states = solve_steady_states(cavity, medium, start);
  const SteadyState* initial = &states.front();
  for (const auto& st : states) {
    if (st.stable()) {
      initial = &st;
      break;
    }
  }

  IntegrationOptions options;
  options.duration = (config.detuning_high - config.detuning_low) / rate;
  options.time_step = config.time_step;
  options.include_photothermal = config.include_photothermal;
  options.record_interval = config.record_interval;
  Trajectory traj = integrate_field(cavity, medium, schedule, initial->field, options);
  traj.discontinuities = detect_jumps(traj, config.jump_threshold);
  return traj;
}

HysteresisResult hysteresis_scan(const CavityParams& cavity, const KerrMediumParams& medium,
                                 const ScanConfig& upward, const ScanConfig& downward) {
  if (upward.direction != ScanDirection::upward ||
      downward.direction != ScanDirection::downward) {
    throw Error(ErrorKind::configuration, "hysteresis needs one upward and one downward scan");
  }
  if (upward.detuning_low != downward.detuning_low ||
      upward.detuning_high != downward.detuning_high) {
    throw Error(ErrorKind::configuration, "both scans must cover the same window");
  }
  HysteresisResult out;
  out.up = scan(cavity, medium, upward);
  out.down = scan(cavity, medium, downward);

  std::vector<double> down_x(out.down.detuning.rbegin(), out.down.detuning.rend());
  std::vector<double> down_p(out.down.transmitted_power.rbegin(),
                             out.down.transmitted_power.rend());
  constexpr std::size_t kSamples = 4001;
  const double lo = upward.detuning_low;
  const double step = (upward.detuning_high - lo) / static_cast<double>(kSamples - 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const double diff = std::abs(interpolate(out.up.detuning, out.up.transmitted_power, x) -
                                 interpolate(down_x, down_p, x));
    out.max_difference = std::max(out.max_difference, diff);
    if (i > 0) out.loop_area += 0.5 * (prev + diff) * step;
    prev = diff;
  }
  out.hysteretic = out.max_difference > 0.05 * out.up.resonant_power;
  return out;
}

std::vector<Discontinuity> detect_jumps(const Trajectory& trajectory, double threshold) {
  std::vector<Discontinuity> jumps;
  const auto& t = trajectory.times;
  const auto& p = trajectory.transmitted_power;
  const std::size_t n = std::min(t.size(), p.size());
  if (n < 3) return jumps;
  const double window = 10.0 * trajectory.charging_time;
  const double level = threshold * trajectory.resonant_power;

  // end[i]: last sample within one window of sample i.
  std::vector<std::size_t> end(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    j = std::max(j, i);
    while (j + 1 < n && t[j + 1] <= t[i] + window) ++j;
    end[i] = j;
  }
  auto step_at = [&](std::size_t i) { return p[end[i]] - p[i]; };

  std::size_t i = 0;
  while (i < n) {
    const double d = step_at(i);
    if (std::abs(d) <= level) {
      ++i;
      continue;
    }
    const double sign = d > 0.0 ? 1.0 : -1.0;
    std::size_t best = i;
    std::size_t k = i;
    while (k < n && sign * step_at(k) > level) {
      if (std::abs(step_at(k)) > std::abs(step_at(best))) best = k;
      ++k;
    }
    const std::size_t last = end[best];
    const double p0 = p[best];
    const double dp = p[last] - p0;
    const double l10 = p0 + 0.1 * dp;
    const double l50 = p0 + 0.5 * dp;
    const double l90 = p0 + 0.9 * dp;

    double t10 = t[best], t50 = t[best], t90 = t[last];
    std::size_t m = best + 1;
    for (; m <= last; ++m) {
      if (sign * (p[m] - l10) >= 0.0) {
        t10 = interpolate_time(t[m - 1], p[m - 1], t[m], p[m], l10);
        break;
      }
    }
    std::size_t m50 = m;
    for (; m50 <= last; ++m50) {
      if (sign * (p[m50] - l50) >= 0.0) {
        t50 = interpolate_time(t[m50 - 1], p[m50 - 1], t[m50], p[m50], l50);
        break;
      }
    }
    for (std::size_t q = std::max<std::size_t>(m, best + 1); q <= last; ++q) {
      if (sign * (p[q] - l90) >= 0.0) {
        t90 = interpolate_time(t[q - 1], p[q - 1], t[q], p[q], l90);
        break;
      }
    }
    jumps.push_back({t50, t90 - t10, dp});
    i = std::max(k, last + 1);
  }
  return jumps;
}

}  // namespace kerrspring
