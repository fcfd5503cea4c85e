#pragma once

#include <Eigen/Dense>

#include <deque>
#include <optional>

namespace resonance {

/// Anderson mixing (type II) for x = T(x), driven by residuals r = T(x) - x.
/// With an empty history a step is the damped Picard step x + beta r.
class AndersonMixer {
 public:
  AndersonMixer(int depth, double beta) : depth_(depth), beta_(beta) {}

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
    if (prev_x_) {
      dx_.push_back(x - *prev_x_);
      dr_.push_back(r - *prev_r_);
      if (static_cast<int>(dx_.size()) > depth_) {
        dx_.pop_front();
        dr_.pop_front();
      }
    }
    prev_x_ = x;
    prev_r_ = r;
    Eigen::VectorXd plain = x + beta_ * r;
    if (dx_.empty() || depth_ == 0) return plain;

    const Eigen::Index k = static_cast<Eigen::Index>(dx_.size());
    Eigen::MatrixXd DX(x.size(), k), DR(x.size(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      DX.col(j) = dx_[static_cast<std::size_t>(j)];
      DR.col(j) = dr_[static_cast<std::size_t>(j)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(DR);
    qr.setThreshold(1e-10);
    const Eigen::VectorXd gamma = qr.solve(r);
    Eigen::VectorXd next = plain - (DX + beta_ * DR) * gamma;
    if (!next.allFinite() || gamma.norm() > 1e6) {
      reset();
      prev_x_ = x;
      prev_r_ = r;
      return plain;
    }
    return next;
  }

  void reset() {
    dx_.clear();
    dr_.clear();
    prev_x_.reset();
    prev_r_.reset();
  }

 private:
  int depth_;
  double beta_;
  std::deque<Eigen::VectorXd> dx_, dr_;
  std::optional<Eigen::VectorXd> prev_x_, prev_r_;
};

}  // namespace resonance
