#include "salelts/estimator.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace salelts {

BanditState BanditState::init(const ProblemParams& p) {
  if (p.d() < 1) throw std::invalid_argument("state dimension must be positive");
  if (!(p.lambda > 0) || !std::isfinite(p.lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
  BanditState s;
  const int d = p.d();
  s.V_ = p.lambda * Eigen::MatrixXd::Identity(d, d);
  s.V_inv_ = (1.0 / p.lambda) * Eigen::MatrixXd::Identity(d, d);
  s.b_ = Eigen::VectorXd::Zero(d);
  s.theta_hat_ = Eigen::VectorXd::Zero(d);
  s.t_ = 1;
  s.log_det_V_ = d * std::log(p.lambda);
  return s;
}

BanditState BanditState::from_parts(Eigen::MatrixXd V, Eigen::VectorXd b, long t) {
  if (V.rows() != V.cols() || V.rows() != b.size() || b.size() < 1) {
    throw std::invalid_argument("state dimensions mismatch");
  }
  if (!V.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("state has non-finite entries");
  }
  if (t < 1) throw std::invalid_argument("round counter must be at least 1");
  BanditState s;
  s.V_ = (0.5 * (V + V.transpose())).eval();
  s.b_ = std::move(b);
  s.t_ = t;
  s.refresh();
  return s;
}

void BanditState::refresh() {
  const int d = static_cast<int>(V_.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(V_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("state matrix is not positive definite");
  }
  V_inv_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
  V_inv_ = (0.5 * (V_inv_ + V_inv_.transpose())).eval();
  theta_hat_ = V_inv_ * b_;
  double ld = 0.0;
  for (int i = 0; i < d; ++i) ld += std::log(llt.matrixLLT()(i, i));
  log_det_V_ = 2.0 * ld;
  updates_since_refresh_ = 0;
}

void BanditState::update(const PseudoAction& x, double outcome) {
  if (!std::isfinite(outcome)) throw std::invalid_argument("non-finite outcome");
  if (x.dim() != dim()) throw std::invalid_argument("pseudo-action dimension mismatch");
  const Eigen::VectorXd& v = x.value();
  const Eigen::VectorXd Vinv_x = V_inv_ * v;
  const double denom = 1.0 + v.dot(Vinv_x);
  V_.noalias() += v * v.transpose();
  b_.noalias() += outcome * v;
  ++t_;
  if (++updates_since_refresh_ >= kRefreshInterval) {
    refresh();
    return;
  }
  V_inv_.noalias() -= (Vinv_x * Vinv_x.transpose()) / denom;
  V_inv_ = (0.5 * (V_inv_ + V_inv_.transpose())).eval();
  theta_hat_.noalias() = V_inv_ * b_;
  log_det_V_ += std::log(denom);
}

double BanditState::weighted_norm(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch in weighted norm");
  const double q = x.dot(V_inv_ * x);
  return std::sqrt(std::max(q, 0.0));
}

nlohmann::json BanditState::snapshot() const {
  const int d = dim();
  std::vector<double> v(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(i) * d + j] = V_(i, j);
  }
  std::vector<double> bb(b_.data(), b_.data() + d);
  return nlohmann::json{{"v", v}, {"b", bb}, {"t", t_}};
}

BanditState BanditState::from_snapshot(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("v") || !j.contains("b") || !j.contains("t")) {
    throw std::invalid_argument("snapshot must be an object with keys v, b, t");
  }
  std::vector<double> vvec;
  std::vector<double> bvec;
  long t = 0;
  try {
    vvec = j.at("v").get<std::vector<double>>();
    bvec = j.at("b").get<std::vector<double>>();
    t = j.at("t").get<long>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("snapshot fields have wrong types");
  }
  const int d = static_cast<int>(bvec.size());
  if (d < 1 || vvec.size() != static_cast<std::size_t>(d) * d) {
    throw std::invalid_argument("snapshot arrays have inconsistent sizes");
  }
  Eigen::MatrixXd V(d, d);
  for (int i = 0; i < d; ++i) {
    for (int jj = 0; jj < d; ++jj) V(i, jj) = vvec[static_cast<std::size_t>(i) * d + jj];
  }
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(bvec.data(), d);
  return from_parts(std::move(V), std::move(b), t);
}

}  // namespace salelts
