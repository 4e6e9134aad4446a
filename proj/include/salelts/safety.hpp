#pragma once

#include "salelts/estimator.hpp"
#include "salelts/model.hpp"

#include <Eigen/Core>

namespace salelts {

// Confidence radius of the RLS ellipsoid at level delta':
//   beta_t = R * sqrt(d * log((1 + (t-1) L^2 / lambda) / delta')) + sqrt(lambda) * S.
double beta_radius(long t, int d, double R, double S, double L, double lambda,
                   double delta_prime);

// Perturbation radius: gamma_t = beta_t * sqrt(2 sigma^2 d log(2 d / delta')).
double gamma_radius(double beta_t, int d, double sigma, double delta_prime);

// Evaluates the radii at delta' = delta / (4T) for a fixed problem and
// perturbation scale sigma.
class ConfidenceSchedule {
 public:
  explicit ConfidenceSchedule(const ProblemParams& p, double sigma = 1.0);

  double delta_prime() const { return delta_prime_; }
  double beta(long t) const;
  double gamma(long t) const;
  double sigma() const { return sigma_; }

 private:
  ProblemParams p_;
  double sigma_;
  double delta_prime_;
};

// Range of x^T theta over {theta : ||theta - theta_hat||_V <= radius} together
// with the boundary parameters attaining each end.
struct EllipsoidExtrema {
  double lo = 0.0;
  double hi = 0.0;
  Eigen::VectorXd arg_lo;
  Eigen::VectorXd arg_hi;
};

EllipsoidExtrema ellipsoid_extrema(const BanditState& s, const Eigen::VectorXd& x,
                                   double radius);

struct SafeSetDecision {
  double lower = 0.0;   // x^T theta_hat - beta_t ||x||_{V^{-1}}
  double upper = 0.0;   // x^T theta_hat + beta_t ||x||_{V^{-1}}
  bool is_safe = false; // lower >= C1 and upper <= C2, boundaries inclusive
  bool from_seed = false;
};

SafeSetDecision is_safe(const BanditState& s, const PseudoAction& x, long t,
                        const ProblemParams& p, const ConfidenceSchedule& sched);

}  // namespace salelts
