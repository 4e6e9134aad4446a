#include "salelts/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<salelts::PolicyKind> parse_policy_list(const std::string& csv) {
  std::vector<salelts::PolicyKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(salelts::policy_from_string(item));
  }
  if (out.empty()) throw salelts::ConfigError("empty policy list");
  return out;
}

void print_run_digest(const salelts::RunSummary& summary) {
  const long T = summary.config.problem.T;
  for (const salelts::PolicyResult& pr : summary.policies) {
    double sum = 0.0;
    long ok = 0;
    long aborted = 0;
    long violations = 0;
    for (const salelts::ReplicationResult& r : pr.replications) {
      if (r.aborted) {
        ++aborted;
        continue;
      }
      ++ok;
      sum += r.final_cum_regret;
      violations += r.violations;
    }
    const double mean = ok > 0 ? sum / static_cast<double>(ok) : 0.0;
    const double rate =
        ok > 0 ? static_cast<double>(violations) / (static_cast<double>(ok) * T) : 0.0;
    std::printf("%s: mean final cum regret %.6g, violation rate %.3g, aborted %ld/%zu\n",
                salelts::to_string(pr.policy).c_str(), mean, rate, aborted,
                pr.replications.size());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safe leveling linear-bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string policies_csv;
  std::uint64_t seed = 0;
  int replications = 0;

  CLI::App* run = app.add_subcommand("run", "simulate the configured policies and write reports");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory override");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "master seed override");
  run->add_option("--policies", policies_csv, "comma-separated policy subset override");
  CLI::Option* reps_opt =
      run->add_option("--replications", replications, "replication count override");

  CLI::App* validate = app.add_subcommand("validate", "check a config and print its hash");
  validate->add_option("--config", config_path, "experiment config JSON")->required();

  CLI::App* bounds =
      app.add_subcommand("bounds", "evaluate the regret bound terms for a config");
  bounds->add_option("--config", config_path, "experiment config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    salelts::ExperimentConfig cfg = salelts::ExperimentConfig::from_file(config_path);
    if (run->parsed()) {
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (*seed_opt) cfg.master_seed = seed;
      if (*reps_opt) cfg.n_replications = replications;
      if (!policies_csv.empty()) cfg.policies = parse_policy_list(policies_csv);
    }

    if (validate->parsed()) {
      salelts::validate_experiment_config(cfg);
      std::printf("config ok\nhash: %s\n", salelts::config_hash_hex(cfg).c_str());
      return 0;
    }
    if (bounds->parsed()) {
      const salelts::BoundReport report = salelts::evaluate_bounds(cfg);
      std::cout << salelts::bound_report_to_json(report).dump(2) << "\n";
      return 0;
    }

    const salelts::RunSummary summary = salelts::run_experiment(cfg);
    salelts::emit_reports(summary, cfg.output_dir);
    std::printf("wrote %s/rounds.csv, %s/regret_curve.csv, %s/summary.json\n",
                cfg.output_dir.c_str(), cfg.output_dir.c_str(), cfg.output_dir.c_str());
    print_run_digest(summary);
    return 0;
  } catch (const salelts::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
