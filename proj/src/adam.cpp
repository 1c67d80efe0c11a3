#include "footwork/adam.hpp"

#include <cmath>

#include "footwork/binio.hpp"

namespace footwork::net {

Adam::Adam(const Mlp& like, double lr) : lr_(lr) {
  m_.setZero(like);
  v_.setZero(like);
}

namespace {

void update_tensor(Eigen::Ref<Eigen::MatrixXd> p, Eigen::Ref<Eigen::MatrixXd> m,
                   Eigen::Ref<Eigen::MatrixXd> v, const Eigen::MatrixXd& g,
                   double lr, double b1, double b2, double eps, double bc1,
                   double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
  const Eigen::ArrayXXd mhat = m.array() / bc1;
  const Eigen::ArrayXXd vhat = v.array() / bc2;
  p.array() -= lr * mhat / (vhat.sqrt() + eps);
}

}  // namespace

void Adam::step(Mlp& net, const MlpGrads& grads) {
  if (lr_ == 0.0) return; // null update stays bitwise-identical
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (int l = 0; l < net.num_layers(); ++l) {
    update_tensor(net.weights[l], m_.weights[l], v_.weights[l], grads.weights[l],
                  lr_, beta1_, beta2_, eps_, bc1, bc2);
    update_tensor(net.biases[l], m_.biases[l], v_.biases[l], grads.biases[l],
                  lr_, beta1_, beta2_, eps_, bc1, bc2);
  }
  if (net.log_std.size() > 0)
    update_tensor(net.log_std, m_.log_std, v_.log_std, grads.log_std, lr_,
                  beta1_, beta2_, eps_, bc1, bc2);
}

void Adam::save(std::ostream& os) const {
  binio::put_f64(os, lr_);
  binio::put_i64(os, t_);
  binio::put_u64(os, m_.weights.size());
  for (size_t l = 0; l < m_.weights.size(); ++l) {
    binio::put_mat(os, m_.weights[l]);
    binio::put_vec(os, m_.biases[l]);
    binio::put_mat(os, v_.weights[l]);
    binio::put_vec(os, v_.biases[l]);
  }
  binio::put_vec(os, m_.log_std);
  binio::put_vec(os, v_.log_std);
}

void Adam::load(std::istream& is) {
  lr_ = binio::get_f64(is);
  t_ = binio::get_i64(is);
  const auto layers = binio::get_u64(is);
  m_.weights.resize(layers);
  m_.biases.resize(layers);
  v_.weights.resize(layers);
  v_.biases.resize(layers);
  for (std::uint64_t l = 0; l < layers; ++l) {
    m_.weights[l] = binio::get_mat(is);
    m_.biases[l] = binio::get_vec(is);
    v_.weights[l] = binio::get_mat(is);
    v_.biases[l] = binio::get_vec(is);
  }
  m_.log_std = binio::get_vec(is);
  v_.log_std = binio::get_vec(is);
}

}  // namespace footwork::net
