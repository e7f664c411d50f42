#include "learn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace ql::learn {

int Mlp::param_count(const std::vector<int>& sizes) {
  int n = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * (sizes[l] + 1);
  return n;
}

Mlp::Mlp(std::vector<int> sizes, VectorXd params) : sizes_(std::move(sizes)), params_(std::move(params)) {
  if (params_.size() != param_count(sizes_)) throw std::invalid_argument("mlp param size mismatch");
  int off = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(off);
    off += sizes_[l + 1] * (sizes_[l] + 1);
  }
}

namespace {

MatrixXd orthogonal(int rows, int cols, Rng& rng, double gain) {
  MatrixXd a(std::max(rows, cols), std::min(rows, cols));
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  // fix signs so Q is unique given A
  MatrixXd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  MatrixXd w = rows >= cols ? q : MatrixXd(q.transpose());
  return gain * w.topLeftCorner(rows, cols);
}

}  // namespace

Mlp Mlp::init(const std::vector<int>& sizes, Rng& rng, double out_scale) {
  VectorXd params(param_count(sizes));
  int off = 0;
  const int last = static_cast<int>(sizes.size()) - 2;
  for (int l = 0; l + 1 < static_cast<int>(sizes.size()); ++l) {
    const int rows = sizes[l + 1], cols = sizes[l];
    const double gain = l == last ? out_scale : std::sqrt(2.0);
    MatrixXd w = orthogonal(rows, cols, rng, gain);
    Eigen::Map<MatrixXd>(params.data() + off, rows, cols) = w;
    off += rows * cols;
    Eigen::Map<VectorXd>(params.data() + off, rows).setZero();
    off += rows;
  }
  return Mlp(sizes, std::move(params));
}

int Mlp::weight_offset(int layer) const { return offsets_[layer]; }
int Mlp::bias_offset(int layer) const {
  return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
}

Eigen::Map<const MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<const VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

MatrixXd Mlp::forward(const MatrixXd& x, Cache* cache) const {
  if (x.cols() != input_dim()) throw std::invalid_argument("mlp input dim mismatch");
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  MatrixXd h = x;
  const int layers = static_cast<int>(sizes_.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    MatrixXd z = (h * weight(l).transpose()).rowwise() + bias(l).transpose();
    if (l + 1 < layers) {
      h = z.array().tanh();
    } else {
      h = std::move(z);
    }
    if (!h.allFinite()) throw std::runtime_error("non-finite activations");
    if (cache) cache->activations.push_back(h);
  }
  return h;
}

VectorXd Mlp::backward(const Cache& cache, const MatrixXd& d_out) const {
  const int layers = static_cast<int>(sizes_.size()) - 1;
  VectorXd grad = VectorXd::Zero(params_.size());
  MatrixXd delta = d_out;  // dL/dz of current layer (linear head: dz = dY)
  for (int l = layers - 1; l >= 0; --l) {
    const MatrixXd& a_prev = cache.activations[l];
    Eigen::Map<MatrixXd>(grad.data() + weight_offset(l), sizes_[l + 1], sizes_[l]) =
        delta.transpose() * a_prev;
    Eigen::Map<VectorXd>(grad.data() + bias_offset(l), sizes_[l + 1]) = delta.colwise().sum();
    if (l > 0) {
      MatrixXd d_act = delta * weight(l);
      // tanh'(z) = 1 - tanh(z)^2, activations store tanh(z)
      delta = d_act.array() * (1.0 - cache.activations[l].array().square());
    }
  }
  return grad;
}

void Adam::step(VectorXd& params, const VectorXd& grad) {
  if (m.size() != params.size()) reset(static_cast<int>(params.size()));
  t += 1;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad).eval();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  params -= (lr / bc1) * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps).matrix());
}

}  // namespace ql::learn
