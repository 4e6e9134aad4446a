#include "salelts/sampler.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace salelts {

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& V) {
  if (V.rows() != V.cols() || V.rows() < 1) {
    throw std::invalid_argument("matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::runtime_error("matrix is not positive definite");
  }
  const Eigen::VectorXd inv_sqrt_ev = es.eigenvalues().array().rsqrt();
  return es.eigenvectors() * inv_sqrt_ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd sample_eta(const PerturbationConfig& cfg, int d, std::uint64_t draw_index) {
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  Rng rng(split_seed(cfg.rng_seed, draw_index));
  return cfg.sigma * rng.normal_vector(d);
}

Eigen::VectorXd perturb_with_eta(const BanditState& s, long t,
                                 const ConfidenceSchedule& sched,
                                 const Eigen::VectorXd& eta) {
  if (eta.size() != s.dim()) throw std::invalid_argument("eta dimension mismatch");
  const double beta_t = sched.beta(t);
  return s.theta_hat() + beta_t * (inverse_sqrt(s.V()) * eta);
}

Eigen::VectorXd perturb(const BanditState& s, long t, const PerturbationConfig& cfg,
                        const ProblemParams& p, std::uint64_t draw_index) {
  const ConfidenceSchedule sched(p, cfg.sigma);
  return perturb_with_eta(s, t, sched, sample_eta(cfg, s.dim(), draw_index));
}

namespace {

double wilson_center(double p_hat, int n, double z) {
  return (p_hat + z * z / (2.0 * n)) / (1.0 + z * z / n);
}

double wilson_margin(double p_hat, int n, double z) {
  const double inner = p_hat * (1.0 - p_hat) / n + z * z / (4.0 * static_cast<double>(n) * n);
  return (z * std::sqrt(inner)) / (1.0 + z * z / n);
}

}  // namespace

double wilson_lower_bound(int successes, int n, double z) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (successes <= 0) return 0.0;  // exact; the closed form leaves rounding dust
  const double p_hat = static_cast<double>(successes) / n;
  return std::max(0.0, wilson_center(p_hat, n, z) - wilson_margin(p_hat, n, z));
}

double wilson_upper_bound(int successes, int n, double z) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (successes >= n) return 1.0;
  const double p_hat = static_cast<double>(successes) / n;
  return std::min(1.0, wilson_center(p_hat, n, z) + wilson_margin(p_hat, n, z));
}

OptimismEstimate estimate_optimism_p(const BanditState& s, long t,
                                     const PerturbationConfig& cfg,
                                     const ProblemParams& p,
                                     const std::vector<PseudoAction>& candidates,
                                     int n_samples) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be positive");
  if (candidates.empty()) throw std::invalid_argument("candidate set is empty");
  const ConfidenceSchedule sched(p, cfg.sigma);
  const double beta_t = sched.beta(t);
  const Eigen::MatrixXd scale = beta_t * inverse_sqrt(s.V());

  std::vector<std::size_t> safe_idx;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (is_safe(s, candidates[i], t, p, sched).is_safe) safe_idx.push_back(i);
  }

  int successes = 0;
  for (int k = 0; k < n_samples; ++k) {
    const Eigen::VectorXd eta = sample_eta(cfg, s.dim(), static_cast<std::uint64_t>(k));
    const Eigen::VectorXd theta_tilde = s.theta_hat() + scale * eta;
    std::size_t best_all = 0;
    double best_all_v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double v = std::abs(candidates[i].value().dot(theta_tilde) - p.K);
      if (v < best_all_v) {
        best_all_v = v;
        best_all = i;
      }
    }
    if (safe_idx.empty()) {
      ++successes;
      continue;
    }
    std::size_t best_safe = safe_idx.front();
    double best_safe_v = std::numeric_limits<double>::infinity();
    for (std::size_t i : safe_idx) {
      const double v = std::abs(candidates[i].value().dot(theta_tilde) - p.K);
      if (v < best_safe_v) {
        best_safe_v = v;
        best_safe = i;
      }
    }
    if (best_safe == best_all) ++successes;
  }

  OptimismEstimate out;
  out.successes = successes;
  out.n_samples = n_samples;
  out.estimate = static_cast<double>(successes) / n_samples;
  out.wilson_lower = wilson_lower_bound(successes, n_samples);
  out.wilson_upper = wilson_upper_bound(successes, n_samples);
  out.wilson_half_width = 0.5 * (out.wilson_upper - out.wilson_lower);
  return out;
}

}  // namespace salelts
