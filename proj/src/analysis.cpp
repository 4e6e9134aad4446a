#include "salelts/analysis.hpp"

#include "salelts/safety.hpp"

#include <cmath>
#include <stdexcept>

namespace salelts {

std::vector<double> cumulative_regret(const std::vector<RoundLog>& logs) {
  std::vector<double> out;
  out.reserve(logs.size());
  double acc = 0.0;
  for (const RoundLog& lg : logs) {
    acc += lg.regret;
    out.push_back(acc);
  }
  return out;
}

std::pair<double, bool> g_threshold(const ProblemParams& p) {
  const double c = 0.5 * (p.C2 - p.C1);
  if (p.epsilon > 0.0) return {std::min(c, p.epsilon * p.L), false};
  return {c, true};
}

BoundReport theorem1_bound(const ProblemParams& p, double p_opt, double sigma) {
  if (auto err = validate_params(p)) throw std::invalid_argument(*err);
  if (!(p_opt > 0.0) || p_opt > 1.0) {
    throw std::invalid_argument("p_opt must lie in (0, 1]");
  }
  const ConfidenceSchedule sched(p, sigma);
  BoundReport r;
  r.sigma = sigma;
  r.delta_prime = sched.delta_prime();
  r.beta_T = sched.beta(p.T);
  r.gamma_T = sched.gamma(p.T);
  r.C = 0.5 * (p.C2 - p.C1);
  const auto [g, fallback] = g_threshold(p);
  r.G = g;
  r.epsilon_fallback = fallback;
  r.p_used = p_opt;

  const double T = static_cast<double>(p.T);
  const double d = static_cast<double>(p.d());
  const double thr = r.G / (2.0 * (r.beta_T + r.gamma_T));
  const double lg = std::log1p(thr * thr);

  r.prop4_bound = prop4_rhs(p.T, p.d(), p.L, p.lambda);
  r.term_exploration = (r.beta_T + (1.0 + 2.0 / p_opt) * r.gamma_T) * r.prop4_bound;
  r.term_concentration =
      (2.0 * r.gamma_T / p_opt) *
      std::sqrt(8.0 * T * p.L * p.L / p.lambda * std::log(4.0 / p.delta));
  r.term_unready = 6.0 * r.C * d / lg * std::log1p(p.L * p.L / (p.lambda * lg));
  r.theorem1_value = r.term_exploration + r.term_concentration + r.term_unready;
  r.lemma1_tau_bound = lemma1_bound(p, r.beta_T, r.gamma_T);
  r.horizon_ok = T > p.delta / (2.0 * p_opt);
  return r;
}

double lemma1_bound(const ProblemParams& p, double beta_T, double gamma_T) {
  if (auto err = validate_params(p)) throw std::invalid_argument(*err);
  if (!(beta_T > 0.0) || !(gamma_T >= 0.0)) {
    throw std::invalid_argument("radii must be positive");
  }
  const auto [g, fallback] = g_threshold(p);
  (void)fallback;
  const double thr = g / (2.0 * (beta_T + gamma_T));
  const double lg = std::log1p(thr * thr);
  const double d = static_cast<double>(p.d());
  return 3.0 * d / lg * std::log1p(p.L * p.L / (p.lambda * lg));
}

double prop4_rhs(long T, int d, double L, double lambda) {
  if (T < 0) throw std::invalid_argument("T must be nonnegative");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double t = static_cast<double>(T);
  const double dd = static_cast<double>(d);
  return std::sqrt(2.0 * t * dd * std::log1p(t * L * L / (dd * lambda)));
}

Prop4Check prop4_check(const std::vector<RoundLog>& logs, const ProblemParams& p) {
  Prop4Check c;
  for (const RoundLog& lg : logs) c.lhs += lg.weighted_norm;
  c.rhs = prop4_rhs(static_cast<long>(logs.size()), p.d(), p.L, p.lambda);
  c.ok = c.lhs <= c.rhs + 1e-9;
  return c;
}

EventSummary event_monitor(const std::vector<RoundLog>& logs, const ProblemParams& p,
                           double beta_T, double gamma_T) {
  EventSummary s;
  for (const RoundLog& lg : logs) {
    if (!lg.e_hat) ++s.e_hat_failures;
    if (!lg.e_tilde) ++s.e_tilde_failures;
    if (!lg.d_event) ++s.d_failures;
  }
  s.lemma1_tau_bound = lemma1_bound(p, beta_T, gamma_T);
  s.d_within_bound = static_cast<double>(s.d_failures) <= s.lemma1_tau_bound;
  return s;
}

}  // namespace salelts
