#pragma once

#include "salelts/analysis.hpp"
#include "salelts/environment.hpp"
#include "salelts/estimator.hpp"
#include "salelts/model.hpp"
#include "salelts/policy.hpp"
#include "salelts/sampler.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace salelts {

inline constexpr const char* kCodeVersion = "0.1.0";

// Anything wrong with the configuration itself (parse errors, unknown keys,
// invalid parameter combinations). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyKind { kSaleLts, kLeLts, kOracle, kSeedOnly };

PolicyKind policy_from_string(const std::string& name);
std::string to_string(PolicyKind k);

struct SamplerSettings {
  double sigma = 1.0;
  int p_mc_samples = 2000;
  double p_override = 0.0;  // 0 disables the override
};

struct ExperimentConfig {
  ProblemParams problem;

  std::optional<Eigen::VectorXd> theta_star;  // fixed hidden parameter; absent = drawn per replication
  NoiseModel noise = NoiseModel::kGaussian;
  ContextGen context_gen;
  double seed_margin = -1.0;  // negative = default 0.1 * (C2 - C1)
  int seed_set_size = 3;
  std::optional<std::vector<Eigen::VectorXd>> meal_schedule;

  std::vector<PolicyKind> policies;

  Eigen::VectorXd grid_low;
  Eigen::VectorXd grid_high;
  int grid_points_per_dim = 201;

  int n_meal_events = 30;
  int n_cycles = 15;
  int n_replications = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  SamplerSettings sampler;
  bool permute_context_order = false;

  double resolved_seed_margin() const {
    return seed_margin >= 0.0 ? seed_margin : 0.1 * (problem.C2 - problem.C1);
  }

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  // Canonical echo of the effective configuration (derived values included).
  nlohmann::json to_json() const;
};

// Semantic validation beyond JSON shape; throws ConfigError.
void validate_experiment_config(const ExperimentConfig& cfg);

// FNV-1a 64 over the canonical config dump, as a hex string.
std::string config_hash_hex(const ExperimentConfig& cfg);

struct ReplicationResult {
  int replication = 0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<RoundLog> logs;
  std::vector<double> cum_regret;
  double final_cum_regret = 0.0;
  long violations = 0;
  long first_cycle_violations = 0;
  long seed_rounds = 0;
  EventSummary events;
  Prop4Check prop4;
  OptimismEstimate p_estimate;
  double p_used = 0.0;
  BoundReport bound;
  bool bound_evaluated = false;
  bool bound_holds = false;
};

struct PolicyResult {
  PolicyKind policy = PolicyKind::kSaleLts;
  std::vector<ReplicationResult> replications;
};

struct RunSummary {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<PolicyResult> policies;
};

// Runs every configured policy for n_replications rounds of T steps each.
// Replications are independent (parallel-safe) with RNG streams keyed by
// (master_seed, replication, purpose), so results do not depend on scheduling.
RunSummary run_experiment(const ExperimentConfig& cfg);

// Evaluates the regret bound for a config without simulating: p comes from
// sampler.p_override when set, otherwise from estimate_optimism_p at the
// initial state of replication 0.
BoundReport evaluate_bounds(const ExperimentConfig& cfg);

nlohmann::ordered_json summary_to_json(const RunSummary& summary);
nlohmann::ordered_json bound_report_to_json(const BoundReport& r);

// Writes rounds.csv, regret_curve.csv, and summary.json into out_dir.
void emit_reports(const RunSummary& summary, const std::string& out_dir);

}  // namespace salelts
