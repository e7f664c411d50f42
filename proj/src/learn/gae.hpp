#pragma once

#include <Eigen/Dense>

namespace ql::learn {

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// values has one trailing bootstrap entry (length T+1); dones has length T.
// delta_t = r_t + gamma v_{t+1} (1-done_t) - v_t
// A_t = delta_t + gamma lambda (1-done_t) A_{t+1};  returns = A + v
GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const Eigen::VectorXd& dones, double gamma, double lambda);

}  // namespace ql::learn
