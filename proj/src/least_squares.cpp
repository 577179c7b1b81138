#include "kerrspring/least_squares.hpp"

#include <cmath>
#include <limits>

#include "kerrspring/errors.hpp"

namespace kerrspring {

namespace {

Eigen::MatrixXd forward_difference(const ResidualFn& f, const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& r0) {
  Eigen::MatrixXd j(r0.size(), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = std::sqrt(std::numeric_limits<double>::epsilon()) *
                     std::max(std::abs(p(k)), 1e-8);
    Eigen::VectorXd q = p;
    q(k) += h;
    j.col(k) = (f(q) - r0) / h;
  }
  return j;
}

bool evaluate(const ResidualFn& f, const Eigen::VectorXd& p, Eigen::VectorXd& r) {
  try {
    r = f(p);
  } catch (const Error&) {
    return false;
  }
  return r.allFinite();
}

}  // namespace

LeastSquaresResult solve_least_squares(const ResidualFn& residuals, const JacobianFn& jacobian,
                                       const Eigen::VectorXd& initial,
                                       const LeastSquaresOptions& options) {
  LeastSquaresResult out;
  out.params = initial;
  if (!evaluate(residuals, out.params, out.residuals)) {
    out.message = "residuals not finite at the starting point";
    return out;
  }
  out.cost = out.residuals.squaredNorm();
  auto jac = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
    return jacobian ? jacobian(p) : forward_difference(residuals, p, r);
  };
  out.jacobian = jac(out.params, out.residuals);

  double lambda = options.initial_damping;
  const double tol = options.relative_step_tolerance;
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    const Eigen::MatrixXd& j = out.jacobian;
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd grad = j.transpose() * out.residuals;
    Eigen::VectorXd scale = jtj.diagonal().cwiseSqrt();
    for (Eigen::Index k = 0; k < scale.size(); ++k) {
      if (!(scale(k) > 0.0)) scale(k) = 1.0;
    }
    if (out.cost == 0.0 || grad.cwiseQuotient(scale).norm() == 0.0) {
      out.converged = true;
      out.message = "exact fit";
      return out;
    }

    bool accepted = false;
    while (lambda < 1e20) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * scale.cwiseAbs2();
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      const Eigen::VectorXd trial = out.params + step;
      const double step_norm = scale.cwiseProduct(step).norm();
      const double param_norm = scale.cwiseProduct(out.params).norm();
      Eigen::VectorXd r;
      if (evaluate(residuals, trial, r) && r.squaredNorm() <= out.cost) {
        const bool small = step_norm <= tol * (param_norm + tol);
        out.params = trial;
        out.residuals = r;
        out.cost = r.squaredNorm();
        out.jacobian = jac(out.params, out.residuals);
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (small) {
          out.converged = true;
          out.message = "relative step below tolerance";
          return out;
        }
        break;
      }
      if (step_norm <= tol * (param_norm + tol)) {
        // No decrease is possible at this resolution: the iterate is a
        // minimum to working precision.
        out.converged = true;
        out.message = "relative step below tolerance";
        return out;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      out.message = "damping exhausted without cost decrease";
      return out;
    }
  }
  out.message = "iteration limit reached";
  return out;
}

Eigen::MatrixXd normal_matrix_inverse(const Eigen::MatrixXd& jacobian) {
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  return jtj.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace kerrspring
