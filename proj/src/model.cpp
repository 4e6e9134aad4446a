#include "salelts/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace salelts {

std::optional<std::string> validate_params(const ProblemParams& p) {
  for (double v : {p.K, p.C1, p.C2, p.R, p.S, p.L, p.lambda, p.delta, p.epsilon}) {
    if (!std::isfinite(v)) return "non-finite parameter";
  }
  if (p.d_z < 0) return "d_z must be nonnegative";
  if (p.d_a < 1) return "d_a must be positive";
  if (p.C1 > p.C2) return "C1 above C2";
  if (p.K < p.C1) return "K below C1";
  if (p.K > p.C2) return "K above C2";
  if (p.R < 0) return "R must be nonnegative";
  if (p.S <= 0) return "S must be positive";
  if (p.L <= 0) return "L must be positive";
  if (p.lambda < std::max(1.0, p.L * p.L)) return "lambda below max(1, L^2)";
  if (!(p.delta > 0.0 && p.delta < 1.0)) return "delta outside (0, 1)";
  if (p.T < 1) return "T must be at least 1";
  if (p.epsilon < 0) return "epsilon must be nonnegative";
  return std::nullopt;
}

Context::Context(Eigen::VectorXd z) : z_(std::move(z)) {
  if (!z_.allFinite()) throw std::invalid_argument("context has non-finite entries");
}

Action::Action(Eigen::VectorXd a) : a_(std::move(a)) {
  if (!a_.allFinite()) throw std::invalid_argument("action has non-finite entries");
}

PseudoAction::PseudoAction(Eigen::VectorXd x, double L) : x_(std::move(x)) {
  if (!x_.allFinite()) throw std::invalid_argument("pseudo-action has non-finite entries");
  if (!std::isfinite(L) || L <= 0) {
    throw std::invalid_argument("pseudo-action norm bound must be positive");
  }
  const double n = x_.norm();
  if (n > L) {
    std::ostringstream msg;
    msg << "pseudo-action norm " << n << " exceeds bound " << L;
    throw std::invalid_argument(msg.str());
  }
}

PseudoAction compose(const Context& z, const Action& a, const ProblemParams& p) {
  if (z.dim() != p.d_z) {
    std::ostringstream msg;
    msg << "context dimension " << z.dim() << " does not match d_z=" << p.d_z;
    throw std::invalid_argument(msg.str());
  }
  if (a.dim() != p.d_a) {
    std::ostringstream msg;
    msg << "action dimension " << a.dim() << " does not match d_a=" << p.d_a;
    throw std::invalid_argument(msg.str());
  }
  Eigen::VectorXd x(p.d());
  x.head(p.d_z) = z.value();
  x.tail(p.d_a) = a.value();
  return PseudoAction(std::move(x), p.L);
}

}  // namespace salelts
