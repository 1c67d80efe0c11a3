#include "footwork/mlp.hpp"

#include <cmath>

#include "footwork/binio.hpp"
#include "footwork/errors.hpp"

namespace footwork::net {

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  n += static_cast<std::size_t>(log_std.size());
  return n;
}

Mlp mlp_init(int input_dim, const std::vector<int>& hidden, int output_dim,
             Rng& rng, bool with_log_std) {
  Mlp net;
  int in = input_dim;
  std::vector<int> dims = hidden;
  dims.push_back(output_dim);
  for (int out : dims) {
    const double bound = std::sqrt(6.0 / in);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        w(r, c) = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(out));
    in = out;
  }
  if (with_log_std) net.log_std = Eigen::VectorXd::Zero(output_dim);
  return net;
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input,
                            ForwardCache* cache) {
  if (input.rows() != net.input_dim())
    throw ShapeMismatch("mlp_forward: input has " + std::to_string(input.rows()) +
                        " rows, expected " + std::to_string(net.input_dim()));
  if (cache) {
    cache->input = input;
    cache->pre.clear();
    cache->post.clear();
    cache->layers = net.num_layers();
  }
  Eigen::MatrixXd x = input;
  const int L = net.num_layers();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = (net.weights[l] * x).colwise() + net.biases[l];
    if (cache) cache->pre.push_back(z);
    if (l + 1 < L) {
      x = z.cwiseMax(0.0);
      if (cache) cache->post.push_back(x);
    } else {
      x = std::move(z);
    }
  }
  return x;
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input,
                            ForwardCache* cache) {
  return mlp_forward(net, Eigen::MatrixXd(input), cache).col(0);
}

void MlpGrads::setZero(const Mlp& like) {
  weights.clear();
  biases.clear();
  for (const auto& w : like.weights) weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : like.biases) biases.push_back(Eigen::VectorXd::Zero(b.size()));
  log_std = Eigen::VectorXd::Zero(like.log_std.size());
}

void MlpGrads::add(const MlpGrads& other) {
  for (size_t i = 0; i < weights.size(); ++i) weights[i] += other.weights[i];
  for (size_t i = 0; i < biases.size(); ++i) biases[i] += other.biases[i];
  if (log_std.size() > 0 && other.log_std.size() == log_std.size())
    log_std += other.log_std;
}

void MlpGrads::scale(double s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
  log_std *= s;
}

static Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

static void check_cache(const Mlp& net, const ForwardCache& cache) {
  if (cache.layers != net.num_layers() ||
      cache.pre.size() != static_cast<size_t>(net.num_layers()) ||
      cache.input.rows() != net.input_dim())
    throw StaleCache("backward cache does not match the network");
  for (int l = 0; l < net.num_layers(); ++l)
    if (cache.pre[l].rows() != net.weights[l].rows())
      throw StaleCache("backward cache layer shape mismatch");
}

Eigen::MatrixXd mlp_backward(const Mlp& net, const ForwardCache& cache,
                             const Eigen::MatrixXd& output_grad, MlpGrads& grads) {
  check_cache(net, cache);
  if (output_grad.rows() != net.output_dim() ||
      output_grad.cols() != cache.input.cols())
    throw ShapeMismatch("mlp_backward: output_grad shape mismatch");
  if (grads.weights.empty()) grads.setZero(net);

  const int L = net.num_layers();
  Eigen::MatrixXd delta = output_grad; // d loss / d pre-activation (layer L-1)
  for (int l = L - 1; l >= 0; --l) {
    const Eigen::MatrixXd& layer_in = l == 0 ? cache.input : cache.post[l - 1];
    grads.weights[l] += delta * layer_in.transpose();
    grads.biases[l] += delta.rowwise().sum();
    if (l > 0) {
      const Eigen::MatrixXd dpost = net.weights[l].transpose() * delta;
      delta = dpost.cwiseProduct(relu_mask(cache.pre[l - 1]));
    } else {
      return net.weights[0].transpose() * delta;
    }
  }
  return {};
}

Eigen::MatrixXd input_gradient(const Mlp& net, const ForwardCache& cache) {
  check_cache(net, cache);
  if (net.output_dim() != 1)
    throw ShapeMismatch("input_gradient expects a scalar-output network");
  const int L = net.num_layers();
  Eigen::MatrixXd u = Eigen::MatrixXd::Ones(1, cache.input.cols());
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) u = u.cwiseProduct(relu_mask(cache.pre[l]));
    u = net.weights[l].transpose() * u;
  }
  return u; // (input_dim x batch)
}

double gradient_penalty_backward(const Mlp& net, const ForwardCache& cache,
                                 double coef, MlpGrads& grads) {
  check_cache(net, cache);
  if (grads.weights.empty()) grads.setZero(net);
  const int L = net.num_layers();
  const int B = static_cast<int>(cache.input.cols());

  // reverse chain u_{l-1} = W_l^T (m_l .* u_l); keep every stage
  std::vector<Eigen::MatrixXd> masked(L); // y_l = m_l .* u_l
  std::vector<Eigen::MatrixXd> u(L + 1);  // u[l] has layer-l input width
  u[L] = Eigen::MatrixXd::Ones(1, B);
  for (int l = L - 1; l >= 0; --l) {
    Eigen::MatrixXd y = u[l + 1];
    if (l < L - 1) y = y.cwiseProduct(relu_mask(cache.pre[l]));
    masked[l] = y;
    u[l] = net.weights[l].transpose() * y;
  }
  const Eigen::MatrixXd& g = u[0]; // d out / d input, per sample
  const double penalty = coef * g.colwise().squaredNorm().mean();

  // adjoint sweep over the reverse chain: s_l = m_l .* (W_l s_{l-1})
  const double norm = coef / B; // mean over the batch
  Eigen::MatrixXd s = 2.0 * norm * g;
  for (int l = 0; l < L; ++l) {
    grads.weights[l] += masked[l] * s.transpose();
    Eigen::MatrixXd up = net.weights[l] * s;
    if (l < L - 1) up = up.cwiseProduct(relu_mask(cache.pre[l]));
    s = std::move(up);
  }
  return penalty;
}

Eigen::VectorXd clamped_log_std(const Mlp& policy) {
  return policy.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

GaussianSample gaussian_logprob_sample(const PolicyOutput& policy, Rng& rng) {
  const Eigen::Index d = policy.mean.size();
  GaussianSample s;
  s.action.resize(d);
  for (Eigen::Index i = 0; i < d; ++i)
    s.action[i] = policy.mean[i] + std::exp(policy.log_std[i]) * rng.normal();
  s.log_prob = gaussian_log_prob(s.action, policy.mean, policy.log_std);
  s.entropy = gaussian_entropy(policy.log_std);
  return s;
}

double gaussian_log_prob(const Eigen::VectorXd& action,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    const double z = (action[i] - mean[i]) / std::exp(log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * std::log(2.0 * M_PI);
  }
  return lp;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() +
         0.5 * log_std.size() * std::log(2.0 * M_PI * std::exp(1.0));
}

void save_mlp(std::ostream& os, const Mlp& net) {
  binio::put_u64(os, net.weights.size());
  for (int l = 0; l < net.num_layers(); ++l) {
    binio::put_mat(os, net.weights[l]);
    binio::put_vec(os, net.biases[l]);
  }
  binio::put_vec(os, net.log_std);
}

Mlp load_mlp(std::istream& is) {
  Mlp net;
  const auto layers = binio::get_u64(is);
  for (std::uint64_t l = 0; l < layers; ++l) {
    net.weights.push_back(binio::get_mat(is));
    net.biases.push_back(binio::get_vec(is));
  }
  net.log_std = binio::get_vec(is);
  return net;
}

}  // namespace footwork::net
