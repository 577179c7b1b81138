#pragma once

#include <complex>
#include <span>
#include <vector>

namespace kerrspring {

// All complex roots of sum_k coeffs[k] x^(n-k) (highest degree first), from
// the eigenvalues of the companion matrix. Leading exact zeros are dropped.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

// Real roots among polynomial_roots(): imaginary parts below
// imag_tolerance * |root| are truncated. Sorted ascending.
std::vector<double> real_polynomial_roots(std::span<const double> coeffs,
                                          double imag_tolerance = 1e-8);

// Horner evaluation, highest degree first.
double evaluate_polynomial(std::span<const double> coeffs, double x);

}  // namespace kerrspring
