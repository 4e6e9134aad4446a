#include "salelts/model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace salelts;

namespace {

ProblemParams valid_params() {
  ProblemParams p;
  p.d_z = 2;
  p.d_a = 1;
  p.K = 0.9;
  p.C1 = 0.2;
  p.C2 = 1.8;
  p.R = 0.1;
  p.S = 1.5;
  p.L = 1.0;
  p.lambda = 1.0;
  p.delta = 0.05;
  p.T = 450;
  return p;
}

}  // namespace

TEST_CASE("validate_params accepts the default desk parameters") {
  CHECK_FALSE(validate_params(valid_params()).has_value());
}

TEST_CASE("validate_params reports the first violated invariant") {
  ProblemParams p = valid_params();
  p.K = std::numeric_limits<double>::quiet_NaN();
  CHECK(*validate_params(p) == "non-finite parameter");

  p = valid_params();
  p.d_z = -1;
  CHECK(*validate_params(p) == "d_z must be nonnegative");

  p = valid_params();
  p.d_a = 0;
  CHECK(*validate_params(p) == "d_a must be positive");

  p = valid_params();
  p.C1 = 2.0;
  p.C2 = 1.0;
  p.K = 1.5;
  CHECK(*validate_params(p) == "C1 above C2");

  p = valid_params();
  p.K = 0.1;
  CHECK(*validate_params(p) == "K below C1");

  p = valid_params();
  p.K = 1.9;
  CHECK(*validate_params(p) == "K above C2");

  p = valid_params();
  p.R = -0.1;
  CHECK(*validate_params(p) == "R must be nonnegative");

  p = valid_params();
  p.S = 0.0;
  CHECK(*validate_params(p) == "S must be positive");

  p = valid_params();
  p.L = -1.0;
  CHECK(*validate_params(p) == "L must be positive");

  p = valid_params();
  p.lambda = 0.5;
  CHECK(*validate_params(p) == "lambda below max(1, L^2)");

  p = valid_params();
  p.L = 2.0;
  p.lambda = 2.0;
  CHECK(*validate_params(p) == "lambda below max(1, L^2)");

  p = valid_params();
  p.delta = 1.0;
  CHECK(*validate_params(p) == "delta outside (0, 1)");

  p = valid_params();
  p.T = 0;
  CHECK(*validate_params(p) == "T must be at least 1");

  p = valid_params();
  p.epsilon = -1e-3;
  CHECK(*validate_params(p) == "epsilon must be nonnegative");
}

TEST_CASE("validate_params allows a zero-width safe interval at K") {
  ProblemParams p = valid_params();
  p.C1 = p.C2 = p.K = 1.0;
  CHECK_FALSE(validate_params(p).has_value());
}

TEST_CASE("context and action reject non-finite entries") {
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Context{bad}, std::invalid_argument);
  CHECK_THROWS_AS(Action{bad}, std::invalid_argument);
  CHECK_NOTHROW(Context{Eigen::VectorXd::Zero(2)});
}

TEST_CASE("pseudo-action enforces the norm bound, boundary inclusive") {
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  CHECK_NOTHROW(PseudoAction(x, 5.0));
  CHECK_THROWS_AS(PseudoAction(x, 4.999), std::invalid_argument);
  CHECK_THROWS_AS(PseudoAction(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PseudoAction(x, -1.0), std::invalid_argument);
}

TEST_CASE("compose concatenates context then action") {
  ProblemParams p = valid_params();
  p.L = 10.0;
  p.lambda = 100.0;
  Eigen::VectorXd z(2);
  z << 1.0, 2.0;
  Eigen::VectorXd a(1);
  a << 3.0;
  const PseudoAction x = compose(Context(z), Action(a), p);
  REQUIRE(x.dim() == 3);
  CHECK(x.value()(0) == 1.0);
  CHECK(x.value()(1) == 2.0);
  CHECK(x.value()(2) == 3.0);
}

TEST_CASE("compose rejects dimension mismatches") {
  const ProblemParams p = valid_params();
  Eigen::VectorXd z1(1);
  z1 << 0.1;
  Eigen::VectorXd a1(1);
  a1 << 0.1;
  CHECK_THROWS_AS(compose(Context(z1), Action(a1), p), std::invalid_argument);
  Eigen::VectorXd z2(2);
  z2 << 0.1, 0.1;
  Eigen::VectorXd a2(2);
  a2 << 0.1, 0.1;
  CHECK_THROWS_AS(compose(Context(z2), Action(a2), p), std::invalid_argument);
}

TEST_CASE("compose rejects composed vectors above the norm bound") {
  ProblemParams p = valid_params();
  Eigen::VectorXd z(2);
  z << 0.8, 0.8;
  Eigen::VectorXd a(1);
  a << 0.8;
  CHECK_THROWS_AS(compose(Context(z), Action(a), p), std::invalid_argument);
}

TEST_CASE("d is the composed dimension") {
  ProblemParams p = valid_params();
  CHECK(p.d() == 3);
  p.d_z = 0;
  CHECK(p.d() == 1);
}
