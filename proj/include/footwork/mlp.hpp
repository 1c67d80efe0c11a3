#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "footwork/rng.hpp"

namespace footwork::net {

/// Fully connected ReLU network with a linear output layer. The policy
/// instance carries a state-independent log-std vector; the critic's is
/// empty. Layout: hidden sizes then output, weights row-major out x in.
struct Mlp {
  std::vector<Eigen::MatrixXd> weights; // [l]: (n_out x n_in)
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd log_std;              // empty unless this is a policy head

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

/// Fan-in-scaled uniform weights in [-sqrt(6/fan_in), +sqrt(6/fan_in)],
/// zero biases, zero log-std.
Mlp mlp_init(int input_dim, const std::vector<int>& hidden, int output_dim,
             Rng& rng, bool with_log_std = false);

/// Per-layer inputs and pre-activations retained for the backward pass.
struct ForwardCache {
  Eigen::MatrixXd input;                // (in x batch)
  std::vector<Eigen::MatrixXd> pre;     // pre-activation per layer
  std::vector<Eigen::MatrixXd> post;    // post-activation per hidden layer
  int layers = 0;
};

/// Columns are samples. Throws ShapeMismatch on a wrong input dimension.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input,
                            ForwardCache* cache = nullptr);
Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input,
                            ForwardCache* cache = nullptr);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd log_std;

  void setZero(const Mlp& like);
  void add(const MlpGrads& other);
  void scale(double s);
};

/// Exact reverse-mode gradients of sum(output .* dY) over the batch.
/// Returns the input gradient; accumulates into `grads`.
/// Throws StaleCache when the cache does not match the parameters.
Eigen::MatrixXd mlp_backward(const Mlp& net, const ForwardCache& cache,
                             const Eigen::MatrixXd& output_grad, MlpGrads& grads);

/// d(output_k)/d(input) for a scalar-output network, one column per sample.
Eigen::MatrixXd input_gradient(const Mlp& net, const ForwardCache& cache);

/// Accumulates d/d(params) of mean_batch(||d out/d x||^2) * coef into grads
/// (the discriminator's gradient penalty; ReLU mask derivatives are zero
/// almost everywhere and are dropped, as usual).
double gradient_penalty_backward(const Mlp& net, const ForwardCache& cache,
                                 double coef, MlpGrads& grads);

// ---------------------------------------------------------------------------
// Gaussian policy head

struct PolicyOutput {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std; // clamped to [-5, 2]
  double value = 0.0;      // critic output
};

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

Eigen::VectorXd clamped_log_std(const Mlp& policy);

struct GaussianSample {
  Eigen::VectorXd action; // raw, pre-scaling
  double log_prob = 0.0;
  double entropy = 0.0;
};

GaussianSample gaussian_logprob_sample(const PolicyOutput& policy, Rng& rng);

double gaussian_log_prob(const Eigen::VectorXd& action,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std);
double gaussian_entropy(const Eigen::VectorXd& log_std);

void save_mlp(std::ostream& os, const Mlp& net);
Mlp load_mlp(std::istream& is);

}  // namespace footwork::net
