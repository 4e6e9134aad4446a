#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

namespace salelts {

// Problem constants shared by every module. The pseudo-action dimension is
// d = d_z + d_a. epsilon is the safe-interval width floor used only by the
// bound diagnostics; 0 means "not configured".
struct ProblemParams {
  int d_z = 0;
  int d_a = 1;
  double K = 0.0;       // target level
  double C1 = 0.0;      // lower safety bound
  double C2 = 0.0;      // upper safety bound
  double R = 0.0;       // sub-Gaussian noise scale
  double S = 1.0;       // bound on the hidden parameter norm
  double L = 1.0;       // bound on the pseudo-action norm
  double lambda = 1.0;  // ridge regularizer
  double delta = 0.05;  // global failure probability
  long T = 1;           // horizon in rounds
  double epsilon = 0.0;

  int d() const { return d_z + d_a; }
};

// Returns the first violated invariant as a message, or nullopt when valid.
std::optional<std::string> validate_params(const ProblemParams& p);

class Context {
 public:
  Context() = default;
  explicit Context(Eigen::VectorXd z);
  const Eigen::VectorXd& value() const { return z_; }
  int dim() const { return static_cast<int>(z_.size()); }

 private:
  Eigen::VectorXd z_;
};

class Action {
 public:
  Action() = default;
  explicit Action(Eigen::VectorXd a);
  const Eigen::VectorXd& value() const { return a_; }
  int dim() const { return static_cast<int>(a_.size()); }

 private:
  Eigen::VectorXd a_;
};

// Concatenated (context, action) vector; construction enforces ||x||_2 <= L.
class PseudoAction {
 public:
  PseudoAction() = default;
  PseudoAction(Eigen::VectorXd x, double L);
  const Eigen::VectorXd& value() const { return x_; }
  int dim() const { return static_cast<int>(x_.size()); }

 private:
  Eigen::VectorXd x_;
};

// x = [z; a], validated against the configured dimensions and norm bound.
PseudoAction compose(const Context& z, const Action& a, const ProblemParams& p);

}  // namespace salelts
