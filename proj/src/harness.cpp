#include "salelts/harness.hpp"

#include "salelts/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <thread>
#include <utility>

namespace salelts {

namespace {

// Purpose tags for the per-replication RNG streams. Every random draw is keyed
// by (master_seed, replication, purpose[, round]), so results are independent
// of thread scheduling and of which policies run together.
constexpr std::uint64_t kTagEnv = 1;      // context draws and theta_star rejection
constexpr std::uint64_t kTagNoise = 2;    // outcome noise, keyed per round
constexpr std::uint64_t kTagEta = 3;      // perturbation draws, keyed per round
constexpr std::uint64_t kTagFirst = 4;    // first-round seed choice
constexpr std::uint64_t kTagPEst = 5;     // optimism Monte Carlo
constexpr std::uint64_t kTagPermute = 6;  // context-order permutations, keyed per cycle

std::string json_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void check_keys(const nlohmann::json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError("'" + (where.empty() ? std::string("config") : where) +
                      "' must be an object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key '" + json_path(where, item.key()) + "'");
  }
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& where,
                              const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key '" + json_path(where, key) + "'");
  return *it;
}

double get_double(const nlohmann::json& j, const std::string& where, const char* key) {
  const nlohmann::json& v = require(j, where, key);
  if (!v.is_number()) throw ConfigError("'" + json_path(where, key) + "' must be a number");
  return v.get<double>();
}

double get_double_or(const nlohmann::json& j, const std::string& where, const char* key,
                     double fallback) {
  if (!j.contains(key)) return fallback;
  return get_double(j, where, key);
}

long get_long(const nlohmann::json& j, const std::string& where, const char* key) {
  const nlohmann::json& v = require(j, where, key);
  if (!v.is_number_integer()) {
    throw ConfigError("'" + json_path(where, key) + "' must be an integer");
  }
  return v.get<long>();
}

long get_long_or(const nlohmann::json& j, const std::string& where, const char* key,
                 long fallback) {
  if (!j.contains(key)) return fallback;
  return get_long(j, where, key);
}

std::uint64_t get_seed(const nlohmann::json& j, const std::string& where, const char* key) {
  const nlohmann::json& v = require(j, where, key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<long long>() < 0)) {
    throw ConfigError("'" + json_path(where, key) + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool_or(const nlohmann::json& j, const std::string& where, const char* key,
                 bool fallback) {
  if (!j.contains(key)) return fallback;
  const nlohmann::json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError("'" + json_path(where, key) + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const nlohmann::json& j, const std::string& where, const char* key) {
  const nlohmann::json& v = require(j, where, key);
  if (!v.is_string()) throw ConfigError("'" + json_path(where, key) + "' must be a string");
  return v.get<std::string>();
}

Eigen::VectorXd as_vector(const nlohmann::json& v, const std::string& label) {
  if (!v.is_array()) throw ConfigError("'" + label + "' must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("'" + label + "' must be an array of numbers");
    out(i++) = e.get<double>();
  }
  return out;
}

Eigen::VectorXd get_vector(const nlohmann::json& j, const std::string& where,
                           const char* key) {
  return as_vector(require(j, where, key), json_path(where, key));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Largest attainable squared norm of [z; a] over the two axis-aligned boxes.
double box_sup_norm(const ContextGen& gen, const Eigen::VectorXd& grid_low,
                    const Eigen::VectorXd& grid_high) {
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < gen.low.size(); ++i) {
    s2 += std::max(gen.low(i) * gen.low(i), gen.high(i) * gen.high(i));
  }
  for (Eigen::Index i = 0; i < grid_low.size(); ++i) {
    s2 += std::max(grid_low(i) * grid_low(i), grid_high(i) * grid_high(i));
  }
  return std::sqrt(s2);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double v_norm(const BanditState& s, const Eigen::VectorXd& e) {
  const double q = e.dot(s.V() * e);
  return std::sqrt(std::max(0.0, q));
}

std::vector<int> make_permutation(int n, Rng rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
  }
  return perm;
}

bool feasible_environment(const EnvironmentSpec& env, const ActionGrid& grid,
                          const ProblemParams& p, int seed_size) {
  for (const ContextGapReport& rep : check_assumption3(env, grid, p)) {
    if (rep.warn) return false;
  }
  for (const Context& z : env.meal_schedule) {
    long n_margin = 0;
    for (const Action& a : grid.actions) {
      const PseudoAction x = compose(z, a, p);
      const double y = x.value().dot(env.theta_star);
      if (y >= p.C1 + env.seed_margin && y <= p.C2 - env.seed_margin) ++n_margin;
    }
    if (n_margin < seed_size) return false;
  }
  return true;
}

}  // namespace

PolicyKind policy_from_string(const std::string& name) {
  if (name == "sale_lts") return PolicyKind::kSaleLts;
  if (name == "le_lts") return PolicyKind::kLeLts;
  if (name == "oracle") return PolicyKind::kOracle;
  if (name == "seed_only") return PolicyKind::kSeedOnly;
  throw ConfigError("unknown policy '" + name + "'");
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kSaleLts: return "sale_lts";
    case PolicyKind::kLeLts: return "le_lts";
    case PolicyKind::kOracle: return "oracle";
    case PolicyKind::kSeedOnly: return "seed_only";
  }
  throw std::logic_error("unreachable policy kind");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  check_keys(j, "", {"problem", "environment", "grid", "policies", "n_meal_events",
                     "n_cycles", "n_replications", "master_seed", "output_dir", "sampler",
                     "permute_context_order"});

  ExperimentConfig cfg;
  cfg.n_meal_events = static_cast<int>(get_long_or(j, "", "n_meal_events", 30));
  cfg.n_cycles = static_cast<int>(get_long_or(j, "", "n_cycles", 15));
  cfg.n_replications = static_cast<int>(get_long(j, "", "n_replications"));
  cfg.master_seed = get_seed(j, "", "master_seed");
  if (j.contains("output_dir")) cfg.output_dir = get_string(j, "", "output_dir");
  cfg.permute_context_order = get_bool_or(j, "", "permute_context_order", false);

  const nlohmann::json& jg = require(j, "", "grid");
  check_keys(jg, "grid", {"low", "high", "points_per_dim"});
  cfg.grid_low = get_vector(jg, "grid", "low");
  cfg.grid_high = get_vector(jg, "grid", "high");
  cfg.grid_points_per_dim = static_cast<int>(get_long_or(jg, "grid", "points_per_dim", 201));

  const nlohmann::json& jp = require(j, "", "problem");
  check_keys(jp, "problem",
             {"d_z", "d_a", "k", "c1", "c2", "r", "s", "l", "lambda", "delta", "t",
              "epsilon"});
  cfg.problem.d_z = static_cast<int>(get_long(jp, "problem", "d_z"));
  cfg.problem.d_a = static_cast<int>(get_long(jp, "problem", "d_a"));
  cfg.problem.K = get_double(jp, "problem", "k");
  cfg.problem.C1 = get_double(jp, "problem", "c1");
  cfg.problem.C2 = get_double(jp, "problem", "c2");
  cfg.problem.R = get_double(jp, "problem", "r");
  cfg.problem.S = get_double(jp, "problem", "s");
  cfg.problem.lambda = get_double(jp, "problem", "lambda");
  cfg.problem.delta = get_double(jp, "problem", "delta");
  cfg.problem.T = get_long_or(jp, "problem", "t",
                              static_cast<long>(cfg.n_meal_events) * cfg.n_cycles);
  cfg.problem.epsilon = get_double_or(jp, "problem", "epsilon", 0.0);

  const nlohmann::json& je = require(j, "", "environment");
  check_keys(je, "environment",
             {"theta_star", "noise", "context_gen", "seed_margin", "seed_set_size",
              "meal_schedule"});
  try {
    cfg.noise = noise_model_from_string(get_string(je, "environment", "noise"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (je.contains("context_gen")) {
    const nlohmann::json& jc = je.at("context_gen");
    check_keys(jc, "environment.context_gen", {"low", "high"});
    cfg.context_gen.low = get_vector(jc, "environment.context_gen", "low");
    cfg.context_gen.high = get_vector(jc, "environment.context_gen", "high");
  } else if (cfg.problem.d_z > 0) {
    throw ConfigError("missing key 'environment.context_gen'");
  }
  if (je.contains("theta_star")) {
    cfg.theta_star = as_vector(je.at("theta_star"), "environment.theta_star");
  }
  if (je.contains("seed_margin")) {
    cfg.seed_margin = get_double(je, "environment", "seed_margin");
    if (!(cfg.seed_margin >= 0.0)) {
      throw ConfigError("'environment.seed_margin' must be nonnegative");
    }
  }
  cfg.seed_set_size = static_cast<int>(get_long_or(je, "environment", "seed_set_size", 3));
  if (je.contains("meal_schedule")) {
    const nlohmann::json& js = je.at("meal_schedule");
    if (!js.is_array()) {
      throw ConfigError("'environment.meal_schedule' must be an array of contexts");
    }
    std::vector<Eigen::VectorXd> sched;
    sched.reserve(js.size());
    for (const auto& e : js) sched.push_back(as_vector(e, "environment.meal_schedule"));
    cfg.meal_schedule = std::move(sched);
  }

  // The norm bound defaults to the largest composed vector the boxes allow,
  // with a hair of headroom so boundary points stay admissible.
  if (jp.contains("l")) {
    cfg.problem.L = get_double(jp, "problem", "l");
  } else {
    cfg.problem.L = box_sup_norm(cfg.context_gen, cfg.grid_low, cfg.grid_high) + 1e-9;
  }

  if (j.contains("sampler")) {
    const nlohmann::json& jsamp = j.at("sampler");
    check_keys(jsamp, "sampler", {"sigma", "p_mc_samples", "p_override"});
    cfg.sampler.sigma = get_double_or(jsamp, "sampler", "sigma", 1.0);
    cfg.sampler.p_mc_samples =
        static_cast<int>(get_long_or(jsamp, "sampler", "p_mc_samples", 2000));
    cfg.sampler.p_override = get_double_or(jsamp, "sampler", "p_override", 0.0);
  }

  const nlohmann::json& jpol = require(j, "", "policies");
  if (!jpol.is_array() || jpol.empty()) {
    throw ConfigError("'policies' must be a nonempty array of policy names");
  }
  for (const auto& e : jpol) {
    if (!e.is_string()) throw ConfigError("'policies' must be a nonempty array of policy names");
    cfg.policies.push_back(policy_from_string(e.get<std::string>()));
  }

  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["problem"] = {{"d_z", problem.d_z},   {"d_a", problem.d_a},
                  {"k", problem.K},       {"c1", problem.C1},
                  {"c2", problem.C2},     {"r", problem.R},
                  {"s", problem.S},       {"l", problem.L},
                  {"lambda", problem.lambda}, {"delta", problem.delta},
                  {"t", problem.T},       {"epsilon", problem.epsilon}};
  j["environment"]["noise"] = to_string(noise);
  j["environment"]["context_gen"] = {{"low", to_std(context_gen.low)},
                                     {"high", to_std(context_gen.high)}};
  if (theta_star) j["environment"]["theta_star"] = to_std(*theta_star);
  j["environment"]["seed_margin"] = resolved_seed_margin();
  j["environment"]["seed_set_size"] = seed_set_size;
  if (meal_schedule) {
    nlohmann::json sched = nlohmann::json::array();
    for (const Eigen::VectorXd& z : *meal_schedule) sched.push_back(to_std(z));
    j["environment"]["meal_schedule"] = std::move(sched);
  }
  j["grid"] = {{"low", to_std(grid_low)},
               {"high", to_std(grid_high)},
               {"points_per_dim", grid_points_per_dim}};
  nlohmann::json pol = nlohmann::json::array();
  for (PolicyKind k : policies) pol.push_back(to_string(k));
  j["policies"] = std::move(pol);
  j["n_meal_events"] = n_meal_events;
  j["n_cycles"] = n_cycles;
  j["n_replications"] = n_replications;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir;
  j["sampler"] = {{"sigma", sampler.sigma},
                  {"p_mc_samples", sampler.p_mc_samples},
                  {"p_override", sampler.p_override}};
  j["permute_context_order"] = permute_context_order;
  return j;
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  if (auto msg = validate_params(cfg.problem)) throw ConfigError(*msg);
  const ProblemParams& p = cfg.problem;

  if (cfg.grid_low.size() != p.d_a || cfg.grid_high.size() != p.d_a) {
    throw ConfigError("grid box must have d_a coordinates");
  }
  for (Eigen::Index i = 0; i < cfg.grid_low.size(); ++i) {
    if (!(cfg.grid_low(i) <= cfg.grid_high(i))) {
      throw ConfigError("grid box has low > high");
    }
  }
  if (cfg.grid_points_per_dim < 1) {
    throw ConfigError("grid needs at least one point per dimension");
  }
  double total = 1.0;
  for (int k = 0; k < p.d_a; ++k) total *= static_cast<double>(cfg.grid_points_per_dim);
  if (total > 10'000'000.0) throw ConfigError("grid too large");

  if (cfg.context_gen.low.size() != p.d_z || cfg.context_gen.high.size() != p.d_z) {
    throw ConfigError("context box must have d_z coordinates");
  }
  for (Eigen::Index i = 0; i < cfg.context_gen.low.size(); ++i) {
    if (!(cfg.context_gen.low(i) <= cfg.context_gen.high(i))) {
      throw ConfigError("context box has low > high");
    }
  }
  const double sup = box_sup_norm(cfg.context_gen, cfg.grid_low, cfg.grid_high);
  if (sup > p.L + 1e-9) {
    throw ConfigError("context and action boxes allow norms above l");
  }

  if (cfg.policies.empty()) throw ConfigError("'policies' must be a nonempty array of policy names");
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    for (std::size_t k = i + 1; k < cfg.policies.size(); ++k) {
      if (cfg.policies[i] == cfg.policies[k]) {
        throw ConfigError("duplicate policy '" + to_string(cfg.policies[i]) + "'");
      }
    }
  }

  if (cfg.n_meal_events < 1) throw ConfigError("n_meal_events must be at least 1");
  if (cfg.n_cycles < 1) throw ConfigError("n_cycles must be at least 1");
  if (cfg.n_replications < 1) throw ConfigError("n_replications must be at least 1");
  if (p.T != static_cast<long>(cfg.n_meal_events) * cfg.n_cycles) {
    throw ConfigError("t must equal n_meal_events * n_cycles");
  }

  const double m = cfg.resolved_seed_margin();
  if (p.C1 + m > p.C2 - m) throw ConfigError("seed margin empties the safe interval");
  if (cfg.seed_set_size < 1) throw ConfigError("seed_set_size must be at least 1");

  if (!(cfg.sampler.sigma > 0.0) || !std::isfinite(cfg.sampler.sigma)) {
    throw ConfigError("sampler.sigma must be positive");
  }
  if (cfg.sampler.p_mc_samples < 1) throw ConfigError("sampler.p_mc_samples must be at least 1");
  if (!(cfg.sampler.p_override >= 0.0 && cfg.sampler.p_override <= 1.0)) {
    throw ConfigError("sampler.p_override must lie in [0, 1]");
  }

  if (cfg.theta_star) {
    if (cfg.theta_star->size() != p.d()) {
      throw ConfigError("theta_star must have d_z + d_a coordinates");
    }
    if (!cfg.theta_star->allFinite()) throw ConfigError("theta_star has non-finite entries");
    if (cfg.theta_star->norm() > p.S + 1e-12) {
      throw ConfigError("theta_star norm exceeds s");
    }
  }

  if (cfg.meal_schedule) {
    if (static_cast<int>(cfg.meal_schedule->size()) != cfg.n_meal_events) {
      throw ConfigError("meal_schedule must list n_meal_events contexts");
    }
    for (const Eigen::VectorXd& z : *cfg.meal_schedule) {
      if (z.size() != p.d_z) throw ConfigError("meal_schedule entry has wrong dimension");
      if (!z.allFinite()) throw ConfigError("meal_schedule entry has non-finite entries");
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (z(i) < cfg.context_gen.low(i) || z(i) > cfg.context_gen.high(i)) {
          throw ConfigError("meal_schedule entry outside the context box");
        }
      }
    }
  }

  if (cfg.output_dir.empty()) throw ConfigError("output_dir must be nonempty");
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  const std::string dump = cfg.to_json().dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : dump) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct ReplicationEnv {
  bool ok = false;
  std::string fail_reason;
  EnvironmentSpec env;
  std::vector<Context> contexts;
  std::vector<std::vector<PseudoAction>> composed;  // grid composed with each context
  std::vector<std::vector<PseudoAction>> seeds;
};

ReplicationEnv setup_environment(const ExperimentConfig& cfg, const ActionGrid& grid,
                                 int rep) {
  const ProblemParams& p = cfg.problem;
  ReplicationEnv out;
  Rng env_rng(split_seed(split_seed(cfg.master_seed, static_cast<std::uint64_t>(rep)),
                         kTagEnv));

  if (cfg.meal_schedule) {
    for (const Eigen::VectorXd& z : *cfg.meal_schedule) out.contexts.emplace_back(z);
  } else {
    for (int k = 0; k < cfg.n_meal_events; ++k) {
      out.contexts.push_back(draw_context(cfg.context_gen, env_rng));
    }
  }

  out.env.noise = cfg.noise;
  out.env.context_gen = cfg.context_gen;
  out.env.seed_margin = cfg.resolved_seed_margin();
  out.env.meal_schedule = out.contexts;

  if (cfg.theta_star) {
    out.env.theta_star = *cfg.theta_star;
    if (feasible_environment(out.env, grid, p, cfg.seed_set_size)) {
      out.ok = true;
    } else {
      out.fail_reason = "configured theta_star is infeasible for the drawn contexts";
    }
  } else {
    for (int attempt = 0; attempt < 200; ++attempt) {
      out.env.theta_star = draw_theta_in_ball(p.d(), p.S, env_rng);
      if (feasible_environment(out.env, grid, p, cfg.seed_set_size)) {
        out.ok = true;
        break;
      }
    }
    if (!out.ok) out.fail_reason = "no feasible theta_star found in 200 draws";
  }
  if (!out.ok) return out;

  out.composed.resize(out.contexts.size());
  out.seeds.resize(out.contexts.size());
  for (std::size_t k = 0; k < out.contexts.size(); ++k) {
    out.composed[k].reserve(grid.actions.size());
    for (const Action& a : grid.actions) {
      out.composed[k].push_back(compose(out.contexts[k], a, p));
    }
    out.seeds[k] = gen_seed_set(out.env, out.contexts[k], grid, p, cfg.seed_set_size);
  }
  return out;
}

ReplicationResult run_policy(const ExperimentConfig& cfg, const ActionGrid& grid,
                             const ReplicationEnv& renv, PolicyKind kind, int rep) {
  const ProblemParams& p = cfg.problem;
  const long T = p.T;
  const int d = p.d();
  const std::uint64_t rep_seed = split_seed(cfg.master_seed, static_cast<std::uint64_t>(rep));
  const std::uint64_t noise_seed = split_seed(rep_seed, kTagNoise);
  const std::uint64_t first_seed = split_seed(rep_seed, kTagFirst);
  const std::uint64_t perm_seed = split_seed(rep_seed, kTagPermute);

  const ConfidenceSchedule sched(p, cfg.sampler.sigma);
  const double beta_T = sched.beta(T);
  const double gamma_T = sched.gamma(T);
  const double G = g_threshold(p).first;
  const double d_thr = G / (2.0 * (beta_T + gamma_T));

  const PerturbationConfig eta_cfg{cfg.sampler.sigma, split_seed(rep_seed, kTagEta)};

  ReplicationResult res;
  res.replication = rep;

  BanditState state = BanditState::init(p);
  std::vector<int> perm;
  int perm_cycle = 0;

  try {
    for (long t = 1; t <= T; ++t) {
      const int cycle = static_cast<int>((t - 1) / cfg.n_meal_events) + 1;
      const int pos = static_cast<int>((t - 1) % cfg.n_meal_events);
      int ctx_id = pos;
      if (cfg.permute_context_order) {
        if (cycle != perm_cycle) {
          perm = make_permutation(cfg.n_meal_events,
                                  Rng(split_seed(perm_seed, static_cast<std::uint64_t>(cycle))));
          perm_cycle = cycle;
        }
        ctx_id = perm[static_cast<std::size_t>(pos)];
      }
      const Context& z = renv.contexts[static_cast<std::size_t>(ctx_id)];
      const std::vector<PseudoAction>& seed_set = renv.seeds[static_cast<std::size_t>(ctx_id)];

      Decision dec;
      switch (kind) {
        case PolicyKind::kSaleLts: {
          if (t == 1) {
            Rng fr(split_seed(first_seed, 0));
            dec = first_round_step(seed_set, p.K, fr);
          } else {
            const Eigen::VectorXd eta =
                sample_eta(eta_cfg, d, static_cast<std::uint64_t>(t));
            dec = sale_lts_step_with_eta(state, z, seed_set, grid, t, p,
                                         cfg.sampler.sigma, eta);
          }
          break;
        }
        case PolicyKind::kLeLts: {
          const Eigen::VectorXd eta = sample_eta(eta_cfg, d, static_cast<std::uint64_t>(t));
          dec = le_lts_step_with_eta(state, z, grid, t, p, cfg.sampler.sigma, eta);
          break;
        }
        case PolicyKind::kOracle: {
          dec = oracle_step(z, grid, p, renv.env.theta_star);
          break;
        }
        case PolicyKind::kSeedOnly: {
          if (t == 1) {
            Rng fr(split_seed(first_seed, 0));
            dec = first_round_step(seed_set, p.K, fr);
          } else {
            dec = seed_only_step(seed_set, state.theta_hat(), p.K);
          }
          break;
        }
      }

      RoundLog log;
      log.t = t;
      log.context_id = ctx_id;
      log.cycle = cycle;
      log.x = dec.chosen.value();
      const double y = log.x.dot(renv.env.theta_star);
      // The oracle's proposal is theta_star itself; its logged model is the
      // running estimate so the event columns stay comparable across policies.
      const Eigen::VectorXd& model =
          (kind == PolicyKind::kOracle) ? state.theta_hat() : dec.theta_tilde;
      log.regret = std::abs(y - p.K);
      log.regret_param = std::abs(log.x.dot(renv.env.theta_star - model));
      log.regret_pred = std::abs(log.x.dot(model) - p.K);
      log.violation = y < p.C1 || y > p.C2;
      log.weighted_norm = state.weighted_norm(log.x);
      log.e_hat = v_norm(state, state.theta_hat() - renv.env.theta_star) <= sched.beta(t);
      log.e_tilde = v_norm(state, model - state.theta_hat()) <= sched.gamma(t);
      double max_norm = 0.0;
      for (const PseudoAction& xc : renv.composed[static_cast<std::size_t>(ctx_id)]) {
        max_norm = std::max(max_norm, state.weighted_norm(xc.value()));
      }
      log.d_event = max_norm < d_thr;
      log.from_seed = dec.chosen_from_seed;

      Rng noise_rng(split_seed(noise_seed, static_cast<std::uint64_t>(t)));
      const double outcome = emit_outcome(renv.env, dec.chosen, p, noise_rng);
      log.outcome = outcome;
      state.update(dec.chosen, outcome);
      res.logs.push_back(std::move(log));
    }
  } catch (const std::exception& e) {
    res.aborted = true;
    res.abort_reason = e.what();
  }

  res.cum_regret = cumulative_regret(res.logs);
  if (res.aborted) return res;

  res.final_cum_regret = res.cum_regret.empty() ? 0.0 : res.cum_regret.back();
  for (const RoundLog& log : res.logs) {
    if (log.violation) {
      ++res.violations;
      if (log.cycle == 1) ++res.first_cycle_violations;
    }
    if (log.from_seed) ++res.seed_rounds;
  }
  res.events = event_monitor(res.logs, p, beta_T, gamma_T);
  res.prop4 = prop4_check(res.logs, p);

  const PerturbationConfig pest_cfg{cfg.sampler.sigma, split_seed(rep_seed, kTagPEst)};
  res.p_estimate = estimate_optimism_p(state, state.t(), pest_cfg, p, renv.composed[0],
                                       cfg.sampler.p_mc_samples);
  res.p_used =
      cfg.sampler.p_override > 0.0 ? cfg.sampler.p_override : res.p_estimate.wilson_lower;
  if (res.p_used > 0.0 && res.p_used <= 1.0) {
    res.bound = theorem1_bound(p, res.p_used, cfg.sampler.sigma);
    res.bound_evaluated = true;
    res.bound_holds = res.final_cum_regret <= res.bound.theorem1_value;
  }
  return res;
}

std::vector<ReplicationResult> run_replication(const ExperimentConfig& cfg,
                                               const ActionGrid& grid, int rep) {
  std::vector<ReplicationResult> results;
  results.reserve(cfg.policies.size());
  ReplicationEnv renv;
  std::string setup_error;
  try {
    renv = setup_environment(cfg, grid, rep);
    if (!renv.ok) setup_error = renv.fail_reason;
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  if (!setup_error.empty()) {
    for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
      ReplicationResult res;
      res.replication = rep;
      res.aborted = true;
      res.abort_reason = setup_error;
      results.push_back(std::move(res));
    }
    return results;
  }
  for (PolicyKind kind : cfg.policies) {
    results.push_back(run_policy(cfg, grid, renv, kind, rep));
  }
  return results;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);

  RunSummary out;
  out.config = cfg;
  out.config_hash = config_hash_hex(cfg);

  const ActionGrid grid =
      ActionGrid::uniform(cfg.grid_low, cfg.grid_high, cfg.grid_points_per_dim);

  std::vector<std::vector<ReplicationResult>> by_rep(
      static_cast<std::size_t>(cfg.n_replications));

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned n_threads =
      std::min<unsigned>(hw, static_cast<unsigned>(cfg.n_replications));

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (;;) {
          const int rep = next.fetch_add(1);
          if (rep >= cfg.n_replications) break;
          by_rep[static_cast<std::size_t>(rep)] = run_replication(cfg, grid, rep);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  out.policies.resize(cfg.policies.size());
  for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
    out.policies[pi].policy = cfg.policies[pi];
    out.policies[pi].replications.reserve(by_rep.size());
    for (std::size_t r = 0; r < by_rep.size(); ++r) {
      out.policies[pi].replications.push_back(std::move(by_rep[r][pi]));
    }
  }

  for (const PolicyResult& pr : out.policies) {
    bool any_ok = false;
    for (const ReplicationResult& r : pr.replications) any_ok = any_ok || !r.aborted;
    if (!any_ok) {
      throw std::runtime_error("all replications aborted for policy '" +
                               to_string(pr.policy) + "': " +
                               pr.replications.front().abort_reason);
    }
  }
  return out;
}

BoundReport evaluate_bounds(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);
  const ProblemParams& p = cfg.problem;

  double p_used = cfg.sampler.p_override;
  if (p_used <= 0.0) {
    const ActionGrid grid =
        ActionGrid::uniform(cfg.grid_low, cfg.grid_high, cfg.grid_points_per_dim);
    const std::uint64_t rep_seed = split_seed(cfg.master_seed, 0);
    Rng env_rng(split_seed(rep_seed, kTagEnv));
    Context z0;
    if (cfg.meal_schedule) {
      z0 = Context(cfg.meal_schedule->front());
    } else {
      z0 = draw_context(cfg.context_gen, env_rng);
    }
    std::vector<PseudoAction> candidates;
    candidates.reserve(grid.actions.size());
    for (const Action& a : grid.actions) candidates.push_back(compose(z0, a, p));

    const BanditState s0 = BanditState::init(p);
    const PerturbationConfig pc{cfg.sampler.sigma, split_seed(rep_seed, kTagPEst)};
    const OptimismEstimate est =
        estimate_optimism_p(s0, 1, pc, p, candidates, cfg.sampler.p_mc_samples);
    p_used = est.wilson_lower;
  }
  if (p_used <= 0.0) {
    throw std::runtime_error("optimism estimate has a zero lower bound; no usable p");
  }
  return theorem1_bound(p, p_used, cfg.sampler.sigma);
}

nlohmann::ordered_json bound_report_to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["theorem1_value"] = r.theorem1_value;
  j["term_exploration"] = r.term_exploration;
  j["term_concentration"] = r.term_concentration;
  j["term_unready"] = r.term_unready;
  j["lemma1_tau_bound"] = r.lemma1_tau_bound;
  j["prop4_bound"] = r.prop4_bound;
  j["g"] = r.G;
  j["c"] = r.C;
  j["p_used"] = r.p_used;
  j["beta_t_horizon"] = r.beta_T;
  j["gamma_t_horizon"] = r.gamma_T;
  j["delta_prime"] = r.delta_prime;
  j["sigma"] = r.sigma;
  j["epsilon_fallback"] = r.epsilon_fallback;
  j["horizon_ok"] = r.horizon_ok;
  return j;
}

nlohmann::ordered_json summary_to_json(const RunSummary& summary) {
  const long T = summary.config.problem.T;
  nlohmann::ordered_json j;
  j["version"] = kCodeVersion;
  j["config_hash"] = summary.config_hash;
  j["config"] = summary.config.to_json();

  nlohmann::ordered_json policies = nlohmann::ordered_json::array();
  for (const PolicyResult& pr : summary.policies) {
    nlohmann::ordered_json jp;
    jp["policy"] = to_string(pr.policy);
    jp["n_replications"] = pr.replications.size();

    long n_aborted = 0;
    nlohmann::ordered_json aborts = nlohmann::ordered_json::array();
    std::vector<double> finals;
    std::vector<double> p_estimates;
    std::vector<double> p_lowers;
    std::vector<double> seed_rounds;
    long violations = 0;
    long first_cycle_violations = 0;
    long reps_with_violations = 0;
    long e_hat_failures = 0;
    long e_tilde_failures = 0;
    long d_failures = 0;
    bool d_within_bound = true;
    bool prop4_ok = true;
    long bound_evaluated = 0;
    long bound_holds = 0;
    nlohmann::ordered_json per_rep = nlohmann::ordered_json::array();

    for (const ReplicationResult& r : pr.replications) {
      if (r.aborted) {
        ++n_aborted;
        aborts.push_back({{"replication", r.replication}, {"reason", r.abort_reason}});
      } else {
        finals.push_back(r.final_cum_regret);
        p_estimates.push_back(r.p_estimate.estimate);
        p_lowers.push_back(r.p_estimate.wilson_lower);
        seed_rounds.push_back(static_cast<double>(r.seed_rounds));
        violations += r.violations;
        first_cycle_violations += r.first_cycle_violations;
        if (r.violations > 0) ++reps_with_violations;
        e_hat_failures += r.events.e_hat_failures;
        e_tilde_failures += r.events.e_tilde_failures;
        d_failures += r.events.d_failures;
        d_within_bound = d_within_bound && r.events.d_within_bound;
        prop4_ok = prop4_ok && r.prop4.ok;
        if (r.bound_evaluated) {
          ++bound_evaluated;
          if (r.bound_holds) ++bound_holds;
        }
      }
      nlohmann::ordered_json je;
      je["replication"] = r.replication;
      je["aborted"] = r.aborted;
      je["p_used"] = r.p_used;
      je["final_cum_regret"] = r.final_cum_regret;
      je["theorem1_value"] = r.bound_evaluated ? r.bound.theorem1_value : 0.0;
      je["holds"] = r.bound_holds;
      per_rep.push_back(std::move(je));
    }

    const long n_ok = static_cast<long>(finals.size());
    jp["n_aborted"] = n_aborted;
    jp["abort_reasons"] = std::move(aborts);
    jp["mean_final_cum_regret"] = mean_of(finals);
    jp["std_final_cum_regret"] = sample_std(finals);
    jp["mean_regret_per_round"] = T > 0 ? mean_of(finals) / static_cast<double>(T) : 0.0;
    jp["total_violations"] = violations;
    jp["violation_rate"] =
        n_ok > 0 ? static_cast<double>(violations) / (static_cast<double>(n_ok) * T) : 0.0;
    jp["replications_with_violations"] = reps_with_violations;
    jp["first_cycle_violations"] = first_cycle_violations;
    jp["mean_seed_rounds"] = mean_of(seed_rounds);
    jp["mean_p_estimate"] = mean_of(p_estimates);
    jp["mean_p_wilson_lower"] = mean_of(p_lowers);
    jp["events"] = {{"e_hat_failures", e_hat_failures},
                    {"e_tilde_failures", e_tilde_failures},
                    {"d_failures", d_failures},
                    {"d_within_lemma1_bound", d_within_bound}};
    jp["prop4_ok"] = prop4_ok;
    jp["bound_evaluated_count"] = bound_evaluated;
    jp["bound_holds_count"] = bound_holds;

    const ReplicationResult* first_ok = nullptr;
    for (const ReplicationResult& r : pr.replications) {
      if (!r.aborted && r.bound_evaluated) {
        first_ok = &r;
        break;
      }
    }
    jp["bound_report"] =
        first_ok ? bound_report_to_json(first_ok->bound) : nlohmann::ordered_json(nullptr);
    jp["theorem1_per_replication"] = std::move(per_rep);
    policies.push_back(std::move(jp));
  }
  j["policies"] = std::move(policies);
  return j;
}

void emit_reports(const RunSummary& summary, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream rounds(fs::path(out_dir) / "rounds.csv", std::ios::binary);
    if (!rounds) throw std::runtime_error("cannot write rounds.csv in '" + out_dir + "'");
    rounds << "replication,policy,t,context_id,cycle,regret,cum_regret,violation,"
              "from_seed,d_event,e_hat_event,e_tilde_event,weighted_norm\n";
    for (const PolicyResult& pr : summary.policies) {
      const std::string name = to_string(pr.policy);
      for (const ReplicationResult& r : pr.replications) {
        for (std::size_t i = 0; i < r.logs.size(); ++i) {
          const RoundLog& log = r.logs[i];
          rounds << r.replication << ',' << name << ',' << log.t << ',' << log.context_id
                 << ',' << log.cycle << ',' << fmt17(log.regret) << ','
                 << fmt17(r.cum_regret[i]) << ',' << (log.violation ? 1 : 0) << ','
                 << (log.from_seed ? 1 : 0) << ',' << (log.d_event ? 1 : 0) << ','
                 << (log.e_hat ? 1 : 0) << ',' << (log.e_tilde ? 1 : 0) << ','
                 << fmt17(log.weighted_norm) << '\n';
        }
      }
    }
  }

  {
    const long T = summary.config.problem.T;
    std::ofstream curve(fs::path(out_dir) / "regret_curve.csv", std::ios::binary);
    if (!curve) throw std::runtime_error("cannot write regret_curve.csv in '" + out_dir + "'");
    curve << "policy,t,mean_cum_regret,std_cum_regret\n";
    for (const PolicyResult& pr : summary.policies) {
      const std::string name = to_string(pr.policy);
      for (long t = 1; t <= T; ++t) {
        std::vector<double> at_t;
        for (const ReplicationResult& r : pr.replications) {
          if (r.aborted) continue;
          at_t.push_back(r.cum_regret[static_cast<std::size_t>(t - 1)]);
        }
        curve << name << ',' << t << ',' << fmt17(mean_of(at_t)) << ','
              << fmt17(sample_std(at_t)) << '\n';
      }
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary.json in '" + out_dir + "'");
    out << summary_to_json(summary).dump(2) << '\n';
  }
}

}  // namespace salelts
