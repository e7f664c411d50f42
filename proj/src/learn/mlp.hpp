#pragma once

#include <Eigen/Dense>
#include <vector>

#include "common/rng.hpp"

namespace ql::learn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Fully connected network with tanh hidden activations and a linear output
// head. Parameters live in one flat vector (layer-major: W then b per layer)
// so optimizers and finite-difference checks operate on a single array.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, VectorXd params);

  // orthogonal init, tanh gain sqrt(2) on hidden layers, out_scale on the head
  static Mlp init(const std::vector<int>& sizes, Rng& rng, double out_scale);
  static int param_count(const std::vector<int>& sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  VectorXd& params() { return params_; }
  const VectorXd& params() const { return params_; }

  struct Cache {
    std::vector<MatrixXd> activations;  // [0]=input, [l]=post-tanh, back()=output
  };

  // X: N x in, returns N x out
  MatrixXd forward(const MatrixXd& x, Cache* cache = nullptr) const;

  // dY: N x out gradient of a scalar loss; returns flat parameter gradient
  VectorXd backward(const Cache& cache, const MatrixXd& d_out) const;

 private:
  Eigen::Map<const MatrixXd> weight(int layer) const;
  Eigen::Map<const VectorXd> bias(int layer) const;
  int weight_offset(int layer) const;
  int bias_offset(int layer) const;

  std::vector<int> sizes_;
  VectorXd params_;
  std::vector<int> offsets_;  // per-layer weight offsets
};

struct Adam {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  VectorXd m, v;
  long t = 0;

  void reset(int n) {
    m = VectorXd::Zero(n);
    v = VectorXd::Zero(n);
    t = 0;
  }
  void step(VectorXd& params, const VectorXd& grad);
};

}  // namespace ql::learn
