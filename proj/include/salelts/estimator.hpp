#pragma once

#include "salelts/model.hpp"

#include <Eigen/Core>
#include <json.hpp>

namespace salelts {

// Regularized least-squares state:
//   V = lambda I + sum_i x_i x_i^T,   b = sum_i o_i x_i,   theta_hat = V^{-1} b.
// V_inv is maintained by Sherman-Morrison rank-one updates, symmetrized after
// every step, and recomputed with a dense solve every kRefreshInterval updates
// so floating-point drift stays bounded. The round counter t starts at 1 and
// counts one past the number of absorbed observations.
class BanditState {
 public:
  static constexpr int kRefreshInterval = 256;

  static BanditState init(const ProblemParams& p);
  // Rebuilds the derived members (V_inv, theta_hat, log det) from V and b.
  static BanditState from_parts(Eigen::MatrixXd V, Eigen::VectorXd b, long t = 1);

  void update(const PseudoAction& x, double outcome);

  // ||x||_{V^{-1}}; tiny negative quadratic forms are clamped to zero.
  double weighted_norm(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& V() const { return V_; }
  const Eigen::MatrixXd& V_inv() const { return V_inv_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
  long t() const { return t_; }
  double log_det_V() const { return log_det_V_; }
  int dim() const { return static_cast<int>(b_.size()); }

  // Flat snapshot {"v": row-major d*d array, "b": length-d array, "t": n}.
  nlohmann::json snapshot() const;
  static BanditState from_snapshot(const nlohmann::json& j);

 private:
  BanditState() = default;
  void refresh();

  Eigen::MatrixXd V_;
  Eigen::MatrixXd V_inv_;
  Eigen::VectorXd b_;
  Eigen::VectorXd theta_hat_;
  long t_ = 1;
  double log_det_V_ = 0.0;
  int updates_since_refresh_ = 0;
};

}  // namespace salelts
