#pragma once

#include "salelts/model.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace salelts {

struct RoundLog {
  long t = 0;
  int context_id = 0;
  int cycle = 0;
  Eigen::VectorXd x;          // chosen pseudo-action
  double outcome = 0.0;
  double regret = 0.0;        // |x^T theta_star - K|
  double regret_param = 0.0;  // |x^T (theta_star - theta_tilde)|
  double regret_pred = 0.0;   // |x^T theta_tilde - K|
  bool violation = false;     // x^T theta_star outside [C1, C2]
  double weighted_norm = 0.0; // ||x||_{V_t^{-1}} before the round's update
  bool e_hat = false;         // ||theta_hat - theta_star||_V <= beta_t
  bool e_tilde = false;       // ||theta_tilde - theta_hat||_V <= gamma_t
  bool d_event = false;       // max grid candidate norm below G / (2 (beta_T + gamma_T))
  bool from_seed = false;
};

std::vector<double> cumulative_regret(const std::vector<RoundLog>& logs);

// Safe-interval width scale: G = min{(C2-C1)/2, epsilon * L} when epsilon is
// configured, otherwise (C2-C1)/2 with the fallback flag set.
std::pair<double, bool> g_threshold(const ProblemParams& p);

struct BoundReport {
  double theorem1_value = 0.0;
  double term_exploration = 0.0;    // (beta_T + (1 + 2/p) gamma_T) sqrt(2 T d log(1 + T L^2/(d lambda)))
  double term_concentration = 0.0;  // (2 gamma_T / p) sqrt(8 T L^2/lambda log(4/delta))
  double term_unready = 0.0;        // 6 C d / lg * log(1 + L^2/(lambda lg)), lg = log(1 + (G/(2(beta_T+gamma_T)))^2)
  double lemma1_tau_bound = 0.0;
  double prop4_bound = 0.0;         // sqrt(2 T d log(1 + T L^2/(d lambda)))
  double G = 0.0;
  double C = 0.0;                   // (C2 - C1)/2
  double p_used = 0.0;
  double beta_T = 0.0;
  double gamma_T = 0.0;
  double delta_prime = 0.0;
  double sigma = 1.0;
  bool epsilon_fallback = false;    // G fell back to (C2-C1)/2 because epsilon is unset
  bool horizon_ok = true;           // T > delta / (2 p)
};

// Evaluates the cumulative-regret bound at horizon T for optimism probability
// p_opt in (0, 1]. Throws std::invalid_argument on invalid params or p_opt.
BoundReport theorem1_bound(const ProblemParams& p, double p_opt, double sigma = 1.0);

// Cap on the number of rounds whose information threshold is not yet met.
double lemma1_bound(const ProblemParams& p, double beta_T, double gamma_T);

// Right-hand side of the elliptical-potential inequality at horizon T.
double prop4_rhs(long T, int d, double L, double lambda);

struct Prop4Check {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

// sum_t ||x_t||_{V_t^{-1}} <= sqrt(2 T d log(1 + T L^2/(d lambda))) + 1e-9,
// with T the number of logged rounds.
Prop4Check prop4_check(const std::vector<RoundLog>& logs, const ProblemParams& p);

struct EventSummary {
  long e_hat_failures = 0;
  long e_tilde_failures = 0;
  long d_failures = 0;
  double lemma1_tau_bound = 0.0;
  bool d_within_bound = true;
};

EventSummary event_monitor(const std::vector<RoundLog>& logs, const ProblemParams& p,
                           double beta_T, double gamma_T);

}  // namespace salelts
