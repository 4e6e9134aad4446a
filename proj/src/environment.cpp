#include "salelts/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace salelts {

NoiseModel noise_model_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseModel::kGaussian;
  if (name == "uniform_bounded") return NoiseModel::kUniformBounded;
  if (name == "none") return NoiseModel::kNone;
  throw std::invalid_argument("unknown noise model: " + name);
}

std::string to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::kGaussian:
      return "gaussian";
    case NoiseModel::kUniformBounded:
      return "uniform_bounded";
    case NoiseModel::kNone:
      return "none";
  }
  throw std::logic_error("unhandled noise model");
}

double emit_outcome(const EnvironmentSpec& env, const PseudoAction& x,
                    const ProblemParams& p, Rng& rng) {
  if (env.theta_star.size() != x.dim()) {
    throw std::invalid_argument("theta_star dimension mismatch");
  }
  const double mean = x.value().dot(env.theta_star);
  switch (env.noise) {
    case NoiseModel::kGaussian:
      return mean + p.R * rng.normal();
    case NoiseModel::kUniformBounded: {
      const double a = std::sqrt(3.0) * p.R;
      return mean + rng.uniform(-a, a);
    }
    case NoiseModel::kNone:
      return mean;
  }
  throw std::logic_error("unhandled noise model");
}

bool true_safe(const EnvironmentSpec& env, const PseudoAction& x, const ProblemParams& p) {
  if (env.theta_star.size() != x.dim()) {
    throw std::invalid_argument("theta_star dimension mismatch");
  }
  const double y = x.value().dot(env.theta_star);
  return y >= p.C1 && y <= p.C2;
}

std::vector<PseudoAction> gen_seed_set(const EnvironmentSpec& env, const Context& z,
                                       const ActionGrid& grid, const ProblemParams& p,
                                       int size) {
  if (size < 1) throw std::invalid_argument("seed set size must be positive");
  if (env.seed_margin < 0) throw std::invalid_argument("seed margin must be nonnegative");
  const double lo = p.C1 + env.seed_margin;
  const double hi = p.C2 - env.seed_margin;
  if (lo > hi) throw std::invalid_argument("seed margin empties the safe interval");
  const double mid = 0.5 * (p.C1 + p.C2);

  struct Entry {
    std::size_t idx;
    double dist;
  };
  std::vector<Entry> safe;
  std::vector<PseudoAction> composed;
  composed.reserve(grid.actions.size());
  for (std::size_t i = 0; i < grid.actions.size(); ++i) {
    PseudoAction x = compose(z, grid.actions[i], p);
    const double y = x.value().dot(env.theta_star);
    composed.push_back(std::move(x));
    if (y >= lo && y <= hi) safe.push_back({i, std::abs(y - mid)});
  }
  if (safe.size() < static_cast<std::size_t>(size)) {
    std::ostringstream msg;
    msg << "insufficient margin-safe actions: need " << size << ", found " << safe.size();
    throw std::runtime_error(msg.str());
  }
  std::stable_sort(safe.begin(), safe.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.idx < b.idx;
  });
  std::vector<PseudoAction> out;
  out.reserve(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) out.push_back(composed[safe[static_cast<std::size_t>(k)].idx]);
  return out;
}

std::vector<ContextGapReport> check_assumption3(const EnvironmentSpec& env,
                                                const ActionGrid& grid,
                                                const ProblemParams& p) {
  if (env.meal_schedule.empty()) {
    throw std::invalid_argument("environment has no scheduled contexts");
  }
  if (env.theta_star.size() != p.d()) {
    throw std::invalid_argument("theta_star dimension mismatch");
  }
  const Eigen::VectorXd theta_a = env.theta_star.tail(p.d_a);
  const std::vector<double> h = grid.steps();
  double bound = 0.0;
  for (int k = 0; k < p.d_a; ++k) bound += 0.5 * std::abs(theta_a(k)) * h[static_cast<std::size_t>(k)];

  std::vector<ContextGapReport> reports;
  reports.reserve(env.meal_schedule.size());
  for (std::size_t c = 0; c < env.meal_schedule.size(); ++c) {
    double gap = std::numeric_limits<double>::infinity();
    for (const Action& a : grid.actions) {
      const PseudoAction x = compose(env.meal_schedule[c], a, p);
      gap = std::min(gap, std::abs(x.value().dot(env.theta_star) - p.K));
    }
    ContextGapReport r;
    r.context_id = static_cast<int>(c);
    r.gap = gap;
    r.bound = bound;
    r.warn = gap > bound + 1e-12;
    reports.push_back(r);
  }
  return reports;
}

Context draw_context(const ContextGen& gen, Rng& rng) {
  if (gen.low.size() != gen.high.size()) {
    throw std::invalid_argument("context box dimensions mismatch");
  }
  Eigen::VectorXd z(gen.low.size());
  for (int i = 0; i < gen.low.size(); ++i) {
    if (gen.low(i) > gen.high(i)) throw std::invalid_argument("context box has low > high");
    z(i) = rng.uniform(gen.low(i), gen.high(i));
  }
  return Context(std::move(z));
}

Eigen::VectorXd draw_theta_in_ball(int d, double S, Rng& rng) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(S > 0)) throw std::invalid_argument("S must be positive");
  Eigen::VectorXd dir;
  double n = 0.0;
  do {
    dir = rng.normal_vector(d);
    n = dir.norm();
  } while (n == 0.0);
  const double r = S * std::pow(rng.uniform01(), 1.0 / d);
  return (r / n) * dir;
}

}  // namespace salelts
