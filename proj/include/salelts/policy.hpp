#pragma once

#include "salelts/estimator.hpp"
#include "salelts/model.hpp"
#include "salelts/rng.hpp"
#include "salelts/safety.hpp"
#include "salelts/sampler.hpp"

#include <Eigen/Core>

#include <vector>

namespace salelts {

// Uniform discretization of the action box. Index order is lexicographic with
// the last coordinate varying fastest; ties in every argmin below are broken
// toward the lowest index, so this order is part of the contract.
struct ActionGrid {
  std::vector<Action> actions;
  Eigen::VectorXd low;
  Eigen::VectorXd high;
  int points_per_dim = 201;

  static ActionGrid uniform(const Eigen::VectorXd& low, const Eigen::VectorXd& high,
                            int points_per_dim);
  // Per-dimension spacing; 0 for a single-point dimension.
  std::vector<double> steps() const;
};

struct Decision {
  PseudoAction chosen;
  double residual = 0.0;  // |x^T theta_tilde - K| at the chosen action
  std::size_t candidate_count = 0;
  bool chosen_from_seed = false;
  Eigen::VectorXd theta_tilde;
};

// Leveling step over the proxy-safe grid candidates united with the seed set.
// Grid entries are scanned in index order first, then seed entries, and a
// strict comparison keeps the earliest minimizer of |x^T theta_tilde - K|.
Decision sale_lts_step(const BanditState& s, const Context& z,
                       const std::vector<PseudoAction>& seed_set, const ActionGrid& grid,
                       long t, const ProblemParams& p, const PerturbationConfig& cfg);
Decision sale_lts_step_with_eta(const BanditState& s, const Context& z,
                                const std::vector<PseudoAction>& seed_set,
                                const ActionGrid& grid, long t, const ProblemParams& p,
                                double sigma, const Eigen::VectorXd& eta);

// Unconstrained variant: candidates are the entire grid, no safety filter.
Decision le_lts_step(const BanditState& s, const Context& z, const ActionGrid& grid,
                     long t, const ProblemParams& p, const PerturbationConfig& cfg);
Decision le_lts_step_with_eta(const BanditState& s, const Context& z,
                              const ActionGrid& grid, long t, const ProblemParams& p,
                              double sigma, const Eigen::VectorXd& eta);

// Clairvoyant regret floor: argmin of |x^T theta_star - K| over the truly safe
// grid candidates. Throws std::runtime_error when no candidate is truly safe.
Decision oracle_step(const Context& z, const ActionGrid& grid, const ProblemParams& p,
                     const Eigen::VectorXd& theta_star);

// Plays only seed actions: argmin of |x^T theta - K| over the seed set.
Decision seed_only_step(const std::vector<PseudoAction>& seed_set,
                        const Eigen::VectorXd& theta, double K);

// First round of the safe leveler: uniform random seed choice.
Decision first_round_step(const std::vector<PseudoAction>& seed_set, double K, Rng& rng);

}  // namespace salelts
