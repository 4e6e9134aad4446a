#pragma once

#include "salelts/model.hpp"
#include "salelts/policy.hpp"
#include "salelts/rng.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace salelts {

enum class NoiseModel { kGaussian, kUniformBounded, kNone };

NoiseModel noise_model_from_string(const std::string& name);
std::string to_string(NoiseModel m);

// Per-coordinate uniform box for context draws; empty boxes mean d_z = 0.
struct ContextGen {
  Eigen::VectorXd low;
  Eigen::VectorXd high;
};

struct EnvironmentSpec {
  Eigen::VectorXd theta_star;           // hidden parameter, ||theta_star||_2 <= S
  NoiseModel noise = NoiseModel::kGaussian;
  ContextGen context_gen;
  double seed_margin = 0.0;             // m >= 0
  std::vector<Context> meal_schedule;   // fixed contexts visited round-robin
};

// o = x^T theta_star + xi, with xi drawn from the configured noise model at
// scale R (gaussian: N(0, R^2); uniform_bounded: U[-sqrt(3) R, sqrt(3) R]).
double emit_outcome(const EnvironmentSpec& env, const PseudoAction& x,
                    const ProblemParams& p, Rng& rng);

// Closed-interval membership C1 <= x^T theta_star <= C2.
bool true_safe(const EnvironmentSpec& env, const PseudoAction& x, const ProblemParams& p);

// The `size` grid actions whose outcome lies in [C1 + m, C2 - m], ordered by
// closeness of x^T theta_star to the interval midpoint (C1 + C2) / 2, ties to
// the lower grid index. Throws std::runtime_error when fewer than `size`
// margin-safe actions exist.
std::vector<PseudoAction> gen_seed_set(const EnvironmentSpec& env, const Context& z,
                                       const ActionGrid& grid, const ProblemParams& p,
                                       int size);

struct ContextGapReport {
  int context_id = 0;
  double gap = 0.0;    // min over the grid of |x^T theta_star - K|
  double bound = 0.0;  // grid-resolution bound sum_k |theta_a(k)| h_k / 2
  bool warn = false;
};

// Leveling-feasibility report for every context in the schedule: warns when
// the best achievable gap exceeds what grid resolution alone would explain.
std::vector<ContextGapReport> check_assumption3(const EnvironmentSpec& env,
                                                const ActionGrid& grid,
                                                const ProblemParams& p);

Context draw_context(const ContextGen& gen, Rng& rng);

// Uniform draw from the closed Euclidean ball of radius S.
Eigen::VectorXd draw_theta_in_ball(int d, double S, Rng& rng);

}  // namespace salelts
