#include "salelts/safety.hpp"

#include <cmath>
#include <stdexcept>

namespace salelts {

double beta_radius(long t, int d, double R, double S, double L, double lambda,
                   double delta_prime) {
  if (t < 1) throw std::invalid_argument("t must be at least 1");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    throw std::invalid_argument("delta' outside (0, 1)");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double growth = 1.0 + (static_cast<double>(t - 1) * L * L) / lambda;
  return R * std::sqrt(d * std::log(growth / delta_prime)) + std::sqrt(lambda) * S;
}

double gamma_radius(double beta_t, int d, double sigma, double delta_prime) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    throw std::invalid_argument("delta' outside (0, 1)");
  }
  return beta_t * std::sqrt(2.0 * sigma * sigma * d * std::log(2.0 * d / delta_prime));
}

ConfidenceSchedule::ConfidenceSchedule(const ProblemParams& p, double sigma)
    : p_(p), sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (p.T < 1) throw std::invalid_argument("T must be at least 1");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw std::invalid_argument("delta outside (0, 1)");
  delta_prime_ = p.delta / (4.0 * static_cast<double>(p.T));
}

double ConfidenceSchedule::beta(long t) const {
  return beta_radius(t, p_.d(), p_.R, p_.S, p_.L, p_.lambda, delta_prime_);
}

double ConfidenceSchedule::gamma(long t) const {
  return gamma_radius(beta(t), p_.d(), sigma_, delta_prime_);
}

EllipsoidExtrema ellipsoid_extrema(const BanditState& s, const Eigen::VectorXd& x,
                                   double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("radius must be nonnegative");
  }
  if (x.size() != s.dim()) throw std::invalid_argument("dimension mismatch");
  const double mid = x.dot(s.theta_hat());
  const double wn = s.weighted_norm(x);
  EllipsoidExtrema out;
  out.lo = mid - radius * wn;
  out.hi = mid + radius * wn;
  if (wn > 0.0) {
    // The extrema over the ellipsoid are attained at theta_hat +/- r V^{-1} x / ||x||_{V^{-1}}.
    const Eigen::VectorXd dir = (radius / wn) * (s.V_inv() * x);
    out.arg_hi = s.theta_hat() + dir;
    out.arg_lo = s.theta_hat() - dir;
  } else {
    out.arg_hi = s.theta_hat();
    out.arg_lo = s.theta_hat();
  }
  return out;
}

SafeSetDecision is_safe(const BanditState& s, const PseudoAction& x, long t,
                        const ProblemParams& p, const ConfidenceSchedule& sched) {
  const double beta_t = sched.beta(t);
  const double mid = x.value().dot(s.theta_hat());
  const double wn = s.weighted_norm(x.value());
  SafeSetDecision dec;
  dec.lower = mid - beta_t * wn;
  dec.upper = mid + beta_t * wn;
  dec.is_safe = dec.lower >= p.C1 && dec.upper <= p.C2;
  dec.from_seed = false;
  return dec;
}

}  // namespace salelts
