#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kerrspring/errors.hpp"
#include "kerrspring/least_squares.hpp"

using namespace kerrspring;

TEST_CASE("exponential decay is recovered exactly") {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(30, 0.0, 3.0);
  Eigen::VectorXd y = (2.5 * (-1.3 * t.array()).exp()).matrix();
  const ResidualFn f = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return (p(0) * (-p(1) * t.array()).exp()).matrix() - y;
  };
  Eigen::VectorXd start(2);
  start << 1.0, 0.5;
  const auto res = solve_least_squares(f, {}, start);
  CHECK(res.converged);
  CHECK(res.params(0) == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(res.params(1) == doctest::Approx(1.3).epsilon(1e-8));
  CHECK(res.cost < 1e-20);
}

TEST_CASE("Rosenbrock valley with an analytic Jacobian") {
  const ResidualFn f = [](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    Eigen::VectorXd r(2);
    r << 10.0 * (p(1) - p(0) * p(0)), 1.0 - p(0);
    return r;
  };
  const JacobianFn j = [](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
    Eigen::MatrixXd m(2, 2);
    m << -20.0 * p(0), 10.0, -1.0, 0.0;
    return m;
  };
  Eigen::VectorXd start(2);
  start << -1.2, 1.0;
  const auto res = solve_least_squares(f, j, start);
  CHECK(res.converged);
  CHECK(res.params(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.params(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("infeasible regions are avoided") {
  // Residual throws for p < 0; minimum at p = 0.5.
  const ResidualFn f = [](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    if (p(0) < 0.0) throw Error(ErrorKind::domain, "negative");
    Eigen::VectorXd r(1);
    r << std::sqrt(p(0)) - std::sqrt(0.5);
    return r;
  };
  Eigen::VectorXd start(1);
  start << 3.0;
  const auto res = solve_least_squares(f, {}, start);
  CHECK(res.params(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("normal matrix inverse of a linear model") {
  Eigen::MatrixXd j(3, 2);
  j << 1.0, 0.0, 0.0, 2.0, 1.0, 1.0;
  const Eigen::MatrixXd expected = (j.transpose() * j).inverse();
  CHECK((normal_matrix_inverse(j) - expected).norm() < 1e-12);
}
