#pragma once

#include "salelts/estimator.hpp"
#include "salelts/model.hpp"
#include "salelts/rng.hpp"
#include "salelts/safety.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace salelts {

struct PerturbationConfig {
  double sigma = 1.0;  // isotropic Gaussian scale; must be positive
  std::uint64_t rng_seed = 0;
};

// Symmetric inverse square root via eigendecomposition. Throws
// std::runtime_error when the matrix is not positive definite.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& V);

// Draws eta ~ N(0, sigma^2 I_d). Deterministic in (cfg.rng_seed, draw_index).
Eigen::VectorXd sample_eta(const PerturbationConfig& cfg, int d, std::uint64_t draw_index);

// theta_tilde = theta_hat + beta_t(delta') V^{-1/2} eta with eta supplied.
Eigen::VectorXd perturb_with_eta(const BanditState& s, long t,
                                 const ConfidenceSchedule& sched,
                                 const Eigen::VectorXd& eta);

// Same, drawing eta internally at the given draw index.
Eigen::VectorXd perturb(const BanditState& s, long t, const PerturbationConfig& cfg,
                        const ProblemParams& p, std::uint64_t draw_index);

struct OptimismEstimate {
  double estimate = 0.0;
  double wilson_lower = 0.0;
  double wilson_upper = 0.0;
  double wilson_half_width = 0.0;
  int successes = 0;
  int n_samples = 0;
};

// 95% two-sided Wilson interval bounds for a binomial proportion.
double wilson_lower_bound(int successes, int n, double z = 1.959963984540054);
double wilson_upper_bound(int successes, int n, double z = 1.959963984540054);

// Monte Carlo frequency with which a drawn theta_tilde makes the argmin of
// |x^T theta_tilde - K| over the proxy-safe subset of `candidates` coincide
// with the argmin over all of `candidates`. An empty proxy-safe subset counts
// as success (empty-set inclusion), which makes a one-candidate set estimate 1.
OptimismEstimate estimate_optimism_p(const BanditState& s, long t,
                                     const PerturbationConfig& cfg,
                                     const ProblemParams& p,
                                     const std::vector<PseudoAction>& candidates,
                                     int n_samples);

}  // namespace salelts
