#include "kerrspring/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kerrspring/errors.hpp"

namespace kerrspring {

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
  std::size_t lead = 0;
  while (lead < coeffs.size() && coeffs[lead] == 0.0) ++lead;
  if (lead == coeffs.size()) {
    throw Error(ErrorKind::domain, "polynomial_roots: zero polynomial");
  }
  const auto c = coeffs.subspan(lead);
  for (double v : c) require_finite(v, "polynomial coefficient");
  const auto degree = static_cast<Eigen::Index>(c.size() - 1);
  if (degree == 0) return {};

  // Frobenius companion matrix of the monic polynomial.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (Eigen::Index j = 0; j < degree; ++j) {
    companion(0, j) = -c[static_cast<std::size_t>(j + 1)] / c[0];
  }
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numerical_failure, "companion eigenvalue solver did not converge");
  }
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(degree));
  for (Eigen::Index i = 0; i < degree; ++i) {
    roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  }
  return roots;
}

std::vector<double> real_polynomial_roots(std::span<const double> coeffs,
                                          double imag_tolerance) {
  std::vector<double> out;
  for (const auto& r : polynomial_roots(coeffs)) {
    if (std::abs(r.imag()) <= imag_tolerance * std::abs(r)) out.push_back(r.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double evaluate_polynomial(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (double c : coeffs) acc = acc * x + c;
  return acc;
}

}  // namespace kerrspring
