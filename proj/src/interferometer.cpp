#include "kerrspring/interferometer.hpp"

#include <algorithm>
#include <cmath>

#include "kerrspring/constants.hpp"
#include "kerrspring/errors.hpp"

namespace kerrspring {

namespace {

using Complex = std::complex<double>;

QuadMatrix arm_block(double kerr_phase, ArmBlock block) {
  switch (block) {
    case ArmBlock::kerr:
      return rotation(kerr_phase) * ponderomotive(-2.0 * kerr_phase);
    case ArmBlock::decomposed: {
      const auto d = kerr_decomposition(kerr_phase);
      return d.outer_rotation * d.squeezer * d.inner_rotation;
    }
    case ArmBlock::opa: {
      const auto m = opa_map(kerr_phase, 0.0);
      return rotation(kerr_phase) * squeeze(m.squeeze_factor, m.squeeze_angle) *
             rotation(kerr_phase);
    }
  }
  throw Error(ErrorKind::invalid_parameter, "unknown arm block");
}

void fill_scalars(const MichelsonParams& p, double omega, TwoPhotonResponse& r) {
  r.omega = omega;
  r.phase_delay = p.arm_length * omega / kSpeedOfLight;
  r.coupling = 8.0 * p.carrier_angular_frequency * p.arm_power /
               (p.mass * kSpeedOfLight * kSpeedOfLight * omega * omega);
  r.signal_strength = std::sqrt(4.0 * p.carrier_angular_frequency * p.arm_power *
                                p.arm_length * p.arm_length /
                                (kHbar * kSpeedOfLight * kSpeedOfLight));
}

void require_positive_frequency(double omega) {
  require_finite(omega, "omega");
  if (!(omega > 0.0)) {
    throw Error(ErrorKind::domain,
                "two-photon response needs Omega > 0; use michelson_spring_constant at DC");
  }
}

}  // namespace

QuadMatrix rotation(double angle) {
  QuadMatrix m;
  m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return m;
}

QuadMatrix ponderomotive(double coupling) {
  QuadMatrix m;
  m << 1.0, 0.0, -coupling, 1.0;
  return m;
}

QuadMatrix squeeze(double factor, double angle) {
  require_finite(factor, "squeeze factor");
  if (!(factor > 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "squeeze factor must be positive");
  }
  return rotation(angle) * Eigen::Vector2d(factor, 1.0 / factor).asDiagonal() *
         rotation(-angle);
}

double arccot(double x) { return x == 0.0 ? kPi / 2.0 : std::atan(1.0 / x); }

KerrDecomposition kerr_decomposition(double kerr_phase) {
  require_finite(kerr_phase, "kerr_phase");
  if (!(kerr_phase < 0.0)) {
    throw Error(ErrorKind::domain, "Kerr decomposition is defined for Phi < 0 only");
  }
  KerrDecomposition d;
  d.kerr = rotation(kerr_phase) * ponderomotive(-2.0 * kerr_phase);
  d.squeeze_factor = std::exp(std::asinh(kerr_phase));
  d.squeeze_angle = -arccot(kerr_phase) / 2.0;
  d.inner_angle = std::atan(kerr_phase);
  d.outer_rotation = rotation(kerr_phase);
  d.squeezer = squeeze(d.squeeze_factor, d.squeeze_angle);
  d.inner_rotation = rotation(d.inner_angle);
  d.residual = (d.kerr - d.outer_rotation * d.squeezer * d.inner_rotation).cwiseAbs().maxCoeff();
  return d;
}

OpaParameters opa_map(double kerr_phase, double detune_phase) {
  require_finite(detune_phase, "detune_phase");
  const auto d = kerr_decomposition(kerr_phase);
  return {d.squeeze_factor, d.squeeze_angle, detune_phase + kerr_phase};
}

double kerr_phase_from_susceptibility(double kerr_susceptibility, double arm_length,
                                      double arm_power, double carrier_angular_frequency) {
  return -4.0 * arm_length * arm_length * kerr_susceptibility * arm_power /
         (kHbar * carrier_angular_frequency * kSpeedOfLight * kSpeedOfLight);
}

void validate(const MichelsonParams& p) {
  for (double v : {p.srm_reflectivity, p.srm_transmissivity, p.arm_length, p.arm_power,
                   p.detune_phase, p.kerr_phase, p.mass, p.carrier_angular_frequency}) {
    require_finite(v, "Michelson parameter");
  }
  if (!(p.srm_reflectivity > 0.0) || p.srm_transmissivity < 0.0) {
    throw Error(ErrorKind::invalid_parameter, "need r_s > 0 and t_s >= 0");
  }
  const double sum = p.srm_reflectivity * p.srm_reflectivity +
                     p.srm_transmissivity * p.srm_transmissivity;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::invalid_parameter, "lossless SRM requires r_s^2 + t_s^2 = 1");
  }
  if (!(p.arm_length > 0.0) || p.arm_power < 0.0 || !(p.mass > 0.0) ||
      !(p.carrier_angular_frequency > 0.0)) {
    throw Error(ErrorKind::invalid_parameter,
                "need L_arm > 0, P_arm >= 0, m > 0 and omega_0 > 0");
  }
}

TwoPhotonResponse interferometer_response(const MichelsonParams& p, double omega) {
  validate(p);
  require_positive_frequency(omega);
  TwoPhotonResponse r;
  fill_scalars(p, omega, r);

  const double rs = p.srm_reflectivity;
  const double ts = p.srm_transmissivity;
  const double phi = p.detune_phase;
  const double kp = p.kerr_phase;
  const double psi = 2.0 * phi + kp;
  const double kk = r.coupling - 2.0 * kp;
  const double b = r.phase_delay;
  const Complex z2 = std::polar(1.0, 2.0 * b);
  const Complex z4 = std::polar(1.0, 4.0 * b);

  r.M = 1.0 + rs * rs * z4 - rs * z2 * (2.0 * std::cos(psi) + kk * std::sin(psi));
  const double c2b = 2.0 * rs * std::cos(2.0 * b);
  const double opr = 1.0 + rs * rs;
  r.A(0, 0) = opr * std::cos(psi) + 0.5 * kk * (ts * ts * std::sin(kp) + opr * std::sin(psi)) - c2b;
  r.A(0, 1) = -ts * ts * (kk * std::sin(phi) * std::sin(phi + kp) + std::sin(psi));
  r.A(1, 0) = -ts * ts * (kk * std::cos(phi) * std::cos(phi + kp) - std::sin(psi));
  r.A(1, 1) = opr * std::cos(psi) + 0.5 * kk * (-ts * ts * std::sin(kp) + opr * std::sin(psi)) - c2b;
  const double ta = ts * r.signal_strength;
  r.H.setZero();
  r.H(0, 1) = -ta * (rs * z2 * std::sin(phi) + std::sin(phi + kp));
  r.H(1, 1) = ta * (-rs * z2 * std::cos(phi) + std::cos(phi + kp));
  return r;
}

TwoPhotonResponse chain_response(const MichelsonParams& p, double omega, ArmBlock block) {
  validate(p);
  require_positive_frequency(omega);
  TwoPhotonResponse r;
  fill_scalars(p, omega, r);

  const double rs = p.srm_reflectivity;
  const double ts = p.srm_transmissivity;
  const Complex e1 = std::polar(1.0, r.phase_delay);
  const Complex e2 = e1 * e1;
  const QuadMatrix rot = rotation(p.detune_phase);
  const QuadMatrix arm = arm_block(p.kerr_phase, block);

  // b = -r a + t f, e = r f + t a, c = R e, f = R d,
  // d = X [K c e^{2 i beta} + alpha h e^{i beta}].
  // Eliminating e, c, d: (I - r e^{2 i beta} R X K R) f = t e^{2 i beta} R X K R a
  //                                                     + alpha e^{i beta} R X h.
  const ComplexQuadMatrix round_trip =
      (rot * arm * ponderomotive(r.coupling) * rot).cast<Complex>();
  const ComplexQuadMatrix system = ComplexQuadMatrix::Identity() - rs * e2 * round_trip;
  const Eigen::PartialPivLU<ComplexQuadMatrix> lu(system);
  r.M = system.determinant();

  const ComplexQuadMatrix f_from_a = lu.solve(ts * e2 * round_trip);
  const ComplexQuadMatrix b_from_a = -rs * ComplexQuadMatrix::Identity() + ts * f_from_a;
  r.A = b_from_a * r.M / e2;

  const ComplexQuadMatrix drive = (r.signal_strength * e1 * rot * arm).cast<Complex>();
  const ComplexQuadMatrix b_from_h = ts * lu.solve(drive);
  r.H.setZero();
  r.H.col(1) = b_from_h.col(1) * r.M / e1;
  return r;
}

MichelsonSpring michelson_spring_constant(const MichelsonParams& p) {
  validate(p);
  const double rs = p.srm_reflectivity;
  const double psi = 2.0 * p.detune_phase + p.kerr_phase;
  const double c2 = kSpeedOfLight * kSpeedOfLight;
  const double den =
      rs + 1.0 / rs - 2.0 * std::cos(psi) + 2.0 * p.kerr_phase * std::sin(psi);
  if (den == 0.0) {
    throw Error(ErrorKind::divergent_spring, "Michelson optical spring diverges");
  }
  MichelsonSpring out;
  out.exact = 8.0 * p.carrier_angular_frequency * p.arm_power / c2 * std::sin(psi) / den;

  const double ts = p.srm_transmissivity;
  out.decay = ts * ts * kSpeedOfLight / (4.0 * p.arm_length);
  out.kerr_detuning = p.kerr_phase * kSpeedOfLight / (2.0 * p.arm_length);
  out.detuning = p.detune_phase * kSpeedOfLight / p.arm_length + out.kerr_detuning;
  const double approx_den = out.decay * out.decay + out.detuning * out.detuning +
                            2.0 * out.detuning * out.kerr_detuning;
  if (approx_den == 0.0) {
    throw Error(ErrorKind::divergent_spring, "approximate Michelson spring diverges");
  }
  out.approximate = 4.0 * p.carrier_angular_frequency * p.arm_power /
                    (p.arm_length * kSpeedOfLight) * out.detuning / approx_den;
  return out;
}

double optical_spring_resonance(const MichelsonParams& p) {
  validate(p);
  const double rs = p.srm_reflectivity;
  const double psi = 2.0 * p.detune_phase + p.kerr_phase;
  // M at beta = 0 as a function of the coupling K; it is linear in K with
  // slope -r_s sin(psi), so a root needs K* > 0.
  auto m_of = [&](double coupling) {
    return 1.0 + rs * rs -
           rs * (2.0 * std::cos(psi) + (coupling - 2.0 * p.kerr_phase) * std::sin(psi));
  };
  auto coupling_at = [&](double omega) {
    return 8.0 * p.carrier_angular_frequency * p.arm_power /
           (p.mass * kSpeedOfLight * kSpeedOfLight * omega * omega);
  };
  // K -> infinity as Omega -> 0 and K -> 0 as Omega -> infinity.
  const double m_low_freq_sign = -std::sin(psi);
  const double m_high_freq = m_of(0.0);
  if (std::sin(psi) == 0.0 || !(m_low_freq_sign * m_high_freq < 0.0) || p.arm_power == 0.0) {
    throw Error(ErrorKind::domain, "M has no root at beta = 0 (no restoring optical spring)");
  }
  // Bracket in log Omega.
  double lo = 1e-6;
  double hi = 1e6;
  while (m_of(coupling_at(lo)) * m_low_freq_sign <= 0.0) lo *= 1e-3;
  while (m_of(coupling_at(hi)) * m_high_freq <= 0.0) hi *= 1e3;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double v = m_of(coupling_at(mid));
    if (v == 0.0) return mid;
    (v * m_high_freq > 0.0 ? hi : lo) = mid;
    if (hi / lo - 1.0 < 1e-15) break;
  }
  return std::sqrt(lo * hi);
}

}  // namespace kerrspring
