#pragma once

#include <Eigen/Dense>

#include "footwork/errors.hpp"

namespace footwork::rl {

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

/// Generalized advantage estimation over one trajectory slice:
///   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
///   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
/// with V_{T} = bootstrap_value. returns_t = A_t + V_t.
inline GaeResult compute_gae(const Eigen::VectorXd& rewards,
                             const Eigen::VectorXd& values,
                             const Eigen::VectorXd& dones,
                             double bootstrap_value, double gamma,
                             double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw LengthMismatch("compute_gae: rewards/values/dones lengths differ");
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double adv = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double not_done = 1.0 - dones[t];
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap_value;
    const double delta = rewards[t] + gamma * next_value * not_done - values[t];
    adv = delta + gamma * lambda * not_done * adv;
    out.advantages[t] = adv;
    out.returns[t] = adv + values[t];
  }
  return out;
}

/// Clipped PPO objective contribution for one sample:
///   r = exp(lp_new - lp_old); min(r*A, clamp(r, 1-clip, 1+clip)*A)
inline double ppo_surrogate(double log_prob_new, double log_prob_old,
                            double advantage, double clip) {
  const double ratio = std::exp(log_prob_new - log_prob_old);
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

}  // namespace footwork::rl
