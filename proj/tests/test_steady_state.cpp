#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <vector>

#include "kerrspring/errors.hpp"
#include "kerrspring/steady_state.hpp"
#include "test_support.hpp"

using namespace kerrspring;
using namespace kerrspring::testing;

namespace {

// Real roots of the balance by dense sign-change bracketing and bisection;
// independent of the companion-matrix solver.
std::vector<double> bracketed_roots(const CavityParams& c, const KerrMediumParams& m,
                                    double bare) {
  const double nmax = c.drive_strength() / (c.linear_decay() * c.linear_decay());
  std::vector<double> roots;
  const int steps = 200000;
  double prev_n = 0.0;
  double prev_f = balance(c, m, 0.0, bare);
  for (int i = 1; i <= steps; ++i) {
    const double n = nmax * 1.000001 * i / steps;
    const double f = balance(c, m, n, bare);
    if ((prev_f < 0.0) != (f < 0.0)) {
      double lo = prev_n;
      double hi = n;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        ((balance(c, m, mid, bare) < 0.0) == (prev_f < 0.0) ? lo : hi) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_n = n;
    prev_f = f;
  }
  return roots;
}

// Largest real part of the drift matrix of (delta a, delta a*).
double max_growth(const KerrMediumParams& m, const SteadyState& s) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> nl = i * m.kerr_susceptibility + m.shg_loss;
  Eigen::Matrix2cd j;
  const std::complex<double> p = i * s.effective_detuning - s.effective_decay - nl * s.photon_number;
  const std::complex<double> q = -nl * s.field * s.field;
  j << p, q, std::conj(q), std::conj(p);
  const Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(j);
  return std::max(es.eigenvalues()(0).real(), es.eigenvalues()(1).real());
}

}  // namespace

TEST_CASE("linear cavity gives a Lorentzian") {
  const auto c = make_cavity(100.0, 0.17);
  const auto m = make_medium(c, 0.0);
  const double g = c.linear_decay();
  for (double xi0 : {-3.0, -0.5, 0.0, 0.7, 2.0}) {
    const auto states = solve_steady_states(c, m, xi0 * g);
    REQUIRE(states.size() == 1);
    const double expected = c.drive_strength() / (g * g * (1.0 + xi0 * xi0));
    CHECK(rel_diff(states[0].photon_number, expected) < 1e-12);
    CHECK(states[0].stable());
  }
}

TEST_CASE("solver agrees with bracketing on random parameters") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> zeta(-4.0, 1.0);
  std::uniform_real_distribution<double> xi0(-3.0, 6.0);
  std::uniform_real_distribution<double> beta(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = make_cavity(100.0, 0.17);
    // SHG loss up to 30 % of gamma' at the maximal photon number.
    const double nmax = c.drive_strength() / (c.linear_decay() * c.linear_decay());
    const auto m = make_medium(c, zeta(rng), 0.3 * beta(rng) * c.linear_decay() / nmax);
    const double bare = xi0(rng) * c.linear_decay();
    const auto states = solve_steady_states(c, m, bare);
    const auto oracle = bracketed_roots(c, m, bare);
    REQUIRE(states.size() == oracle.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
      CHECK(rel_diff(states[k].photon_number, oracle[k]) < 1e-9);
      CHECK(balance_residual(c, m, states[k].photon_number, bare) < 1e-9);
      CHECK((max_growth(m, states[k]) < 0.0) == states[k].stable());
    }
  }
}

TEST_CASE("multistable window: middle branch unstable") {
  const auto c = make_cavity(100.0, 0.0);
  const auto m = make_medium(c, 2.0 * kCriticalKerrGain);
  const auto probe = probe_multistability(c, m, -1.0, 6.0, 1e-2);
  REQUIRE(probe.found);
  const auto states = solve_steady_states(c, m, probe.bare_normalized_detuning * c.linear_decay());
  REQUIRE(states.size() == 3);
  CHECK(states[0].stable());
  CHECK_FALSE(states[1].stable());
  CHECK(states[2].stable());
  CHECK(balance_discriminant(c, m, probe.bare_normalized_detuning * c.linear_decay()) > 0.0);
}

TEST_CASE("discriminant sign matches the root count") {
  const auto c = make_cavity(100.0, 0.0);
  const auto m = make_medium(c, 2.5 * kCriticalKerrGain);
  for (double xi0 = -2.0; xi0 < 8.0; xi0 += 0.1) {
    const double bare = xi0 * c.linear_decay();
    const double disc = balance_discriminant(c, m, bare);
    if (std::abs(disc) < 1e-6) continue;
    CHECK((disc > 0.0) == (solve_steady_states(c, m, bare).size() == 3));
  }
}

TEST_CASE("no multistability below the threshold gain") {
  const auto c = make_cavity(100.0, 0.0);
  const auto m = make_medium(c, 0.97 * kCriticalKerrGain);
  CHECK_FALSE(probe_multistability(c, m, -1.0, 4.0, 1e-3).found);
  const auto m2 = make_medium(c, 1.03 * kCriticalKerrGain);
  CHECK(probe_multistability(c, m2, -1.0, 4.0, 1e-3).found);
}

TEST_CASE("power curve: Kerr peak moves to xi0 = -zeta and keeps its height") {
  const auto c = make_cavity(100.0, 0.0);
  const auto m = make_medium(c, -1.0);
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(-2.0 + 1e-3 * i);
  const auto curve = power_curve(c, m, grid, 2);
  CHECK(curve.max_branch_count() == 1);
  double best = 0.0;
  double at = 0.0;
  for (const auto& pt : curve.points) {
    const double p = pt.branches.front().intracavity_power / curve.resonant_power;
    if (p > best) {
      best = p;
      at = pt.bare_normalized_detuning;
    }
  }
  CHECK(best == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(at == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("power curve is independent of the worker count") {
  const auto c = make_cavity(100.0, 0.17);
  const auto m = make_medium(c, -2.0, 1e-7);
  std::vector<double> grid;
  for (int i = 0; i < 300; ++i) grid.push_back(-2.0 + 0.02 * i);
  const auto a = power_curve(c, m, grid, 1);
  const auto b = power_curve(c, m, grid, 4);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.points[i].branches.size() == b.points[i].branches.size());
    for (std::size_t k = 0; k < a.points[i].branches.size(); ++k) {
      CHECK(a.points[i].branches[k].photon_number == b.points[i].branches[k].photon_number);
    }
  }
}

TEST_CASE("state at a given effective or normalized detuning") {
  const auto c = make_cavity(100.0, 0.17);
  const auto m = make_medium(c, -1.2, 2e-7);
  const auto s = steady_state_at_detuning(c, m, 0.8 * c.linear_decay());
  CHECK(s.effective_detuning == doctest::Approx(0.8 * c.linear_decay()));
  CHECK(balance_residual(c, m, s.photon_number, s.bare_detuning) < 1e-12);
  const auto t = steady_state_at_normalized_detuning(c, m, 1.09);
  CHECK(t.normalized_detuning == doctest::Approx(1.09).epsilon(1e-13));
  CHECK(balance_residual(c, m, t.photon_number, t.bare_detuning) < 1e-12);
  CHECK(t.kerr_detuning(m) == doctest::Approx(-m.kerr_susceptibility * t.photon_number / t.effective_decay));
}

TEST_CASE("reflected power closes the energy balance") {
  const auto c = make_cavity(100.0, 0.3);
  const auto m = make_medium(c, -0.5, 3e-7);
  const auto s = steady_state_at_detuning(c, m, 0.4 * c.linear_decay());
  // Dissipated power: 2 (gamma - gamma_in) hbar omega_0 n.
  const double lost = 2.0 * (s.effective_decay - c.input_decay) * kHbar *
                      c.carrier_angular_frequency * s.photon_number;
  CHECK(reflected_power(c, m, s) == doctest::Approx(c.input_power - lost).epsilon(1e-12));
}

TEST_CASE("detuning from transmitted powers") {
  const double pmax = 30.0;
  const auto e = detuning_from_powers(pmax / (1.0 + 0.49), pmax, pmax);
  CHECK(e.xi == doctest::Approx(0.7));
  CHECK_FALSE(e.drift_model_questionable);
  CHECK_FALSE(detuning_from_powers(10.0, 30.0, 35.0).drift_model_questionable);
  CHECK(detuning_from_powers(10.0, 25.0, 35.0).drift_model_questionable);
  try {
    detuning_from_powers(40.0, 30.0, 30.0);
    FAIL("expected inconsistent_powers");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::inconsistent_powers);
  }
}

TEST_CASE("SHG discriminant root") {
  const auto c = make_cavity(100.0, 0.0);
  KerrMediumParams m;
  m.kerr_susceptibility = 1e-6;
  m.shg_loss = 1e-7;
  const auto root = shg_discriminant_root(m, c);
  REQUIRE(root);
  CHECK(*root > 0.0);
  CHECK(std::abs(shg_discriminant(m, c, *root).value) <
        1e-9 * c.linear_decay() * c.linear_decay());
  CHECK(shg_discriminant(m, c, 0.0).amplification_wins);
  m.shg_loss = 1e-6;
  CHECK_FALSE(shg_discriminant_root(m, c));
  CHECK_FALSE(shg_discriminant(m, c, 0.0).amplification_wins);
}
