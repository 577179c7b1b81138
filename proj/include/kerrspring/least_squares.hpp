#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace kerrspring {

// Weighted residual vector r(p); throwing kerrspring::Error marks p as
// infeasible (treated as infinite cost).
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Jacobian dr/dp. Empty selects forward differences.
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  // Converged when ||D dp|| <= tol (||D p|| + tol), D = sqrt(diag(J^T J)).
  double relative_step_tolerance = 1e-10;
  double initial_damping = 1e-3;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::string message;
};

// Damped Gauss-Newton (Levenberg-Marquardt with diagonal scaling).
LeastSquaresResult solve_least_squares(const ResidualFn& residuals, const JacobianFn& jacobian,
                                       const Eigen::VectorXd& initial,
                                       const LeastSquaresOptions& options = {});

// (J^T J)^-1 via a pseudo-inverse so that rank deficiency yields large
// rather than undefined variances.
Eigen::MatrixXd normal_matrix_inverse(const Eigen::MatrixXd& jacobian);

}  // namespace kerrspring
