#pragma once

#include <Eigen/Dense>
#include <complex>

namespace kerrspring {

// Real 2x2 map in the (amplitude, phase) quadrature basis.
using QuadMatrix = Eigen::Matrix2d;
using ComplexQuadMatrix = Eigen::Matrix2cd;

QuadMatrix rotation(double angle);
// (1 0; -k 1).
QuadMatrix ponderomotive(double coupling);
// R(angle) diag(s, 1/s) R(-angle). Throws invalid_parameter for s <= 0.
QuadMatrix squeeze(double factor, double angle);

// arccot on (-pi/2, pi/2], i.e. arctan(1/x); the branch on which the Kerr
// decomposition holds.
double arccot(double x);

struct KerrDecomposition {
  QuadMatrix kerr;            // R(Phi) K(-2 Phi)
  QuadMatrix outer_rotation;  // R(Phi)
  QuadMatrix squeezer;        // S(exp(asinh Phi), -arccot(Phi)/2)
  QuadMatrix inner_rotation;  // R(arctan Phi)
  double squeeze_factor = 1.0;
  double squeeze_angle = 0.0;
  double inner_angle = 0.0;
  double residual = 0.0;  // max |kerr - outer * squeezer * inner|
};

// Defined for Phi < 0 only; throws domain otherwise.
KerrDecomposition kerr_decomposition(double kerr_phase);

struct OpaParameters {
  double squeeze_factor = 1.0;  // s = exp(asinh Phi)
  double squeeze_angle = 0.0;   // eta = -arccot(Phi)/2
  double detune_phase = 0.0;    // phi + Phi
};

OpaParameters opa_map(double kerr_phase, double detune_phase);

// Lossless dual-recycled Michelson with a Kerr medium in each arm.
struct MichelsonParams {
  double srm_reflectivity = 0.0;    // r_s (amplitude)
  double srm_transmissivity = 0.0;  // t_s (amplitude)
  double arm_length = 0.0;          // [m]
  double arm_power = 0.0;           // [W]
  double detune_phase = 0.0;        // phi [rad]
  double kerr_phase = 0.0;          // Phi [rad]
  double mass = 0.0;                // [kg]
  double carrier_angular_frequency = 0.0;
};

// Phi = -4 L_arm^2 chi P_arm / (hbar omega_0 c^2).
double kerr_phase_from_susceptibility(double kerr_susceptibility, double arm_length,
                                      double arm_power, double carrier_angular_frequency);

void validate(const MichelsonParams& params);

struct TwoPhotonResponse {
  double omega = 0.0;        // sideband frequency [rad/s]
  double phase_delay = 0.0;  // beta_arm = L_arm Omega / c
  std::complex<double> M;
  ComplexQuadMatrix A;
  // Full signal matrix; the first column is zero since h = (0, h).
  ComplexQuadMatrix H;
  double coupling = 0.0;         // 8 omega_0 P_arm / (m c^2 Omega^2)
  double signal_strength = 0.0;  // sqrt(4 omega_0 P_arm L_arm^2 / (hbar c^2))

  // (H12, H22).
  Eigen::Vector2cd signal() const { return H.col(1); }
};

// b = (A a e^{2 i beta} + H h e^{i beta}) / M from the closed-form
// coefficients. Omega must be positive.
TwoPhotonResponse interferometer_response(const MichelsonParams& params, double omega);

// Arm block used when assembling the response from the propagation chain.
enum class ArmBlock {
  kerr,        // R(Phi) K(-2 Phi)
  decomposed,  // R(Phi) S(s, eta) R(arctan Phi)
  opa,         // R(Phi) S(s, eta) R(Phi): OPA with the mapped parameters
};

// Same quantities obtained by solving the field propagation equations
// numerically for unit inputs.
TwoPhotonResponse chain_response(const MichelsonParams& params, double omega,
                                 ArmBlock block = ArmBlock::kerr);

struct MichelsonSpring {
  double exact = 0.0;        // [N/m]
  double approximate = 0.0;  // small t_s^2, phi, Phi form [N/m]
  double decay = 0.0;        // gamma = t_s^2 c / (4 L_arm)
  double kerr_detuning = 0.0;  // Delta_K = Phi c / (2 L_arm)
  double detuning = 0.0;       // Delta = phi c / L_arm + Delta_K
};

MichelsonSpring michelson_spring_constant(const MichelsonParams& params);

// Omega_opt with M(Omega_opt) = 0 at beta = 0, by bisection on the real M.
// Throws domain when no positive root exists (anti-spring).
double optical_spring_resonance(const MichelsonParams& params);

}  // namespace kerrspring
