#include "salelts/policy.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace salelts {

ActionGrid ActionGrid::uniform(const Eigen::VectorXd& low, const Eigen::VectorXd& high,
                               int points_per_dim) {
  if (low.size() != high.size() || low.size() < 1) {
    throw std::invalid_argument("grid box dimensions mismatch");
  }
  if (!low.allFinite() || !high.allFinite()) {
    throw std::invalid_argument("grid box has non-finite bounds");
  }
  if (points_per_dim < 1) throw std::invalid_argument("grid needs at least one point per dimension");
  const int da = static_cast<int>(low.size());
  for (int k = 0; k < da; ++k) {
    if (low(k) > high(k)) throw std::invalid_argument("grid box has low > high");
  }
  std::uint64_t total = 1;
  for (int k = 0; k < da; ++k) {
    total *= static_cast<std::uint64_t>(points_per_dim);
    if (total > 10'000'000ULL) throw std::invalid_argument("grid too large");
  }

  ActionGrid g;
  g.low = low;
  g.high = high;
  g.points_per_dim = points_per_dim;
  g.actions.reserve(total);
  Eigen::VectorXd step(da);
  for (int k = 0; k < da; ++k) {
    step(k) = points_per_dim > 1 ? (high(k) - low(k)) / (points_per_dim - 1) : 0.0;
  }
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    Eigen::VectorXd a(da);
    std::uint64_t rem = idx;
    for (int k = da - 1; k >= 0; --k) {
      const std::uint64_t c = rem % static_cast<std::uint64_t>(points_per_dim);
      rem /= static_cast<std::uint64_t>(points_per_dim);
      a(k) = low(k) + step(k) * static_cast<double>(c);
    }
    g.actions.emplace_back(std::move(a));
  }
  return g;
}

std::vector<double> ActionGrid::steps() const {
  std::vector<double> h(static_cast<std::size_t>(low.size()));
  for (int k = 0; k < low.size(); ++k) {
    h[static_cast<std::size_t>(k)] =
        points_per_dim > 1 ? (high(k) - low(k)) / (points_per_dim - 1) : 0.0;
  }
  return h;
}

namespace {

// Shared argmin over [filtered grid candidates] ++ [seed entries]. The
// candidate count deduplicates seeds that are bitwise equal to an admitted
// grid candidate (seed sets are drawn from the same grid).
Decision leveling_argmin(const BanditState& s, const Context& z,
                         const std::vector<PseudoAction>* seed_set, bool filter_safe,
                         const ActionGrid& grid, long t, const ProblemParams& p,
                         const ConfidenceSchedule& sched, Eigen::VectorXd theta_tilde) {
  double best = std::numeric_limits<double>::infinity();
  PseudoAction chosen;
  bool from_seed = false;
  bool found = false;

  std::vector<Eigen::VectorXd> admitted;
  admitted.reserve(grid.actions.size());
  for (const Action& a : grid.actions) {
    PseudoAction x = compose(z, a, p);
    if (filter_safe && !is_safe(s, x, t, p, sched).is_safe) continue;
    const double res = std::abs(x.value().dot(theta_tilde) - p.K);
    admitted.push_back(x.value());
    if (res < best) {
      best = res;
      chosen = std::move(x);
      found = true;
    }
  }

  std::size_t extra = 0;
  if (seed_set != nullptr) {
    for (const PseudoAction& xs : *seed_set) {
      bool dup = false;
      for (const Eigen::VectorXd& v : admitted) {
        if (v.size() == xs.value().size() && v == xs.value()) {
          dup = true;
          break;
        }
      }
      if (!dup) ++extra;
      const double res = std::abs(xs.value().dot(theta_tilde) - p.K);
      if (res < best) {
        best = res;
        chosen = xs;
        from_seed = true;
        found = true;
      }
    }
  }

  if (!found) throw std::runtime_error("no leveling candidate available");

  Decision dec;
  dec.chosen = std::move(chosen);
  dec.residual = best;
  dec.candidate_count = admitted.size() + extra;
  dec.chosen_from_seed = from_seed;
  dec.theta_tilde = std::move(theta_tilde);
  return dec;
}

}  // namespace

Decision sale_lts_step_with_eta(const BanditState& s, const Context& z,
                                const std::vector<PseudoAction>& seed_set,
                                const ActionGrid& grid, long t, const ProblemParams& p,
                                double sigma, const Eigen::VectorXd& eta) {
  if (seed_set.empty()) throw std::invalid_argument("seed set is empty");
  const ConfidenceSchedule sched(p, sigma);
  Eigen::VectorXd theta_tilde = perturb_with_eta(s, t, sched, eta);
  return leveling_argmin(s, z, &seed_set, /*filter_safe=*/true, grid, t, p, sched,
                         std::move(theta_tilde));
}

Decision sale_lts_step(const BanditState& s, const Context& z,
                       const std::vector<PseudoAction>& seed_set, const ActionGrid& grid,
                       long t, const ProblemParams& p, const PerturbationConfig& cfg) {
  const Eigen::VectorXd eta = sample_eta(cfg, s.dim(), static_cast<std::uint64_t>(t));
  return sale_lts_step_with_eta(s, z, seed_set, grid, t, p, cfg.sigma, eta);
}

Decision le_lts_step_with_eta(const BanditState& s, const Context& z,
                              const ActionGrid& grid, long t, const ProblemParams& p,
                              double sigma, const Eigen::VectorXd& eta) {
  if (grid.actions.empty()) throw std::invalid_argument("grid is empty");
  const ConfidenceSchedule sched(p, sigma);
  Eigen::VectorXd theta_tilde = perturb_with_eta(s, t, sched, eta);
  return leveling_argmin(s, z, nullptr, /*filter_safe=*/false, grid, t, p, sched,
                         std::move(theta_tilde));
}

Decision le_lts_step(const BanditState& s, const Context& z, const ActionGrid& grid,
                     long t, const ProblemParams& p, const PerturbationConfig& cfg) {
  const Eigen::VectorXd eta = sample_eta(cfg, s.dim(), static_cast<std::uint64_t>(t));
  return le_lts_step_with_eta(s, z, grid, t, p, cfg.sigma, eta);
}

Decision oracle_step(const Context& z, const ActionGrid& grid, const ProblemParams& p,
                     const Eigen::VectorXd& theta_star) {
  if (grid.actions.empty()) throw std::invalid_argument("grid is empty");
  if (theta_star.size() != p.d()) throw std::invalid_argument("theta_star dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  PseudoAction chosen;
  std::size_t safe_count = 0;
  bool found = false;
  for (const Action& a : grid.actions) {
    PseudoAction x = compose(z, a, p);
    const double y = x.value().dot(theta_star);
    if (y < p.C1 || y > p.C2) continue;
    ++safe_count;
    const double res = std::abs(y - p.K);
    if (res < best) {
      best = res;
      chosen = std::move(x);
      found = true;
    }
  }
  if (!found) throw std::runtime_error("no truly safe candidate in the grid for this context");
  Decision dec;
  dec.chosen = std::move(chosen);
  dec.residual = best;
  dec.candidate_count = safe_count;
  dec.chosen_from_seed = false;
  dec.theta_tilde = theta_star;
  return dec;
}

Decision seed_only_step(const std::vector<PseudoAction>& seed_set,
                        const Eigen::VectorXd& theta, double K) {
  if (seed_set.empty()) throw std::invalid_argument("seed set is empty");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < seed_set.size(); ++i) {
    if (seed_set[i].value().size() != theta.size()) {
      throw std::invalid_argument("seed dimension mismatch");
    }
    const double res = std::abs(seed_set[i].value().dot(theta) - K);
    if (res < best) {
      best = res;
      best_i = i;
    }
  }
  Decision dec;
  dec.chosen = seed_set[best_i];
  dec.residual = best;
  dec.candidate_count = seed_set.size();
  dec.chosen_from_seed = true;
  dec.theta_tilde = theta;
  return dec;
}

Decision first_round_step(const std::vector<PseudoAction>& seed_set, double K, Rng& rng) {
  if (seed_set.empty()) throw std::invalid_argument("seed set is empty");
  const std::size_t i = static_cast<std::size_t>(rng.below(seed_set.size()));
  Decision dec;
  dec.chosen = seed_set[i];
  dec.theta_tilde = Eigen::VectorXd::Zero(seed_set[i].dim());
  dec.residual = std::abs(K);  // theta_hat is 0 before any observation
  dec.candidate_count = seed_set.size();
  dec.chosen_from_seed = true;
  return dec;
}

}  // namespace salelts
