#include "learn/gae.hpp"

#include <stdexcept>

namespace ql::learn {

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const Eigen::VectorXd& dones, double gamma, double lambda) {
  const long t_len = rewards.size();
  if (values.size() != t_len + 1 || dones.size() != t_len) {
    throw std::invalid_argument("compute_gae: misaligned arrays");
  }
  GaeResult out;
  out.advantages = Eigen::VectorXd::Zero(t_len);
  out.returns = Eigen::VectorXd::Zero(t_len);
  double acc = 0.0;
  for (long t = t_len - 1; t >= 0; --t) {
    const double not_done = 1.0 - dones[t];
    const double delta = rewards[t] + gamma * values[t + 1] * not_done - values[t];
    acc = delta + gamma * lambda * not_done * acc;
    out.advantages[t] = acc;
    out.returns[t] = acc + values[t];
  }
  return out;
}

}  // namespace ql::learn
