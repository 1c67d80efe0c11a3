#include "footwork/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace footwork::rewards {

namespace {
constexpr double kDegenerate = 1e-6;
}

double BoundSchedule::active_bound(double progress) const {
  const double f = decay > 0.0 ? std::min(1.0, progress / decay) : 1.0;
  return initial_bound + (final_bound - initial_bound) * f;
}

double velocity_forward_reward(const Eigen::Vector2d& pos,
                               const Eigen::Vector2d& target,
                               const Eigen::Vector2d& v) {
  const Eigen::Vector2d d = target - pos;
  const double dist = d.norm();
  if (dist < kDegenerate) return 0.0;
  return d.dot(v) / dist;
}

double ball_velocity_forward_reward(const Eigen::Vector2d& ball,
                                    const Eigen::Vector2d& goal,
                                    const Eigen::Vector2d& ball_v) {
  return velocity_forward_reward(ball, goal, ball_v);
}

double bound_penalty(double deviation, const BoundSchedule& schedule,
                     double progress, double penalty_weight) {
  return std::abs(deviation) > schedule.active_bound(progress) ? penalty_weight
                                                               : 0.0;
}

RewardTerms kick_reward(const RewardContext& ctx, const RewardWeights& w,
                        const BoundSchedule& drift_bound,
                        const BoundSchedule& ball_back_bound) {
  RewardTerms t;
  t.velocity_forward =
      velocity_forward_reward(ctx.robot_pos, ctx.ball_pos, ctx.robot_vel);
  t.ball_velocity_forward =
      ball_velocity_forward_reward(ctx.ball_pos, ctx.goal, ctx.ball_vel);
  if (ctx.bounds_enabled && ctx.ball_contacted) {
    t.bound_penalty += bound_penalty(ctx.drift_since_contact, drift_bound,
                                     ctx.progress, w.w_bound_penalty);
    const double backward = std::max(
        0.0, -ball_velocity_forward_reward(ctx.ball_pos, ctx.goal, ctx.ball_vel));
    t.bound_penalty += bound_penalty(backward, ball_back_bound, ctx.progress,
                                     w.w_bound_penalty);
  }
  t.total = w.w_velocity_forward * t.velocity_forward +
            w.w_ball_velocity_forward * t.ball_velocity_forward - t.bound_penalty;
  return t;
}

RewardTerms walk_reward(const RewardContext& ctx, const RewardWeights& w) {
  RewardTerms t;
  t.velocity_forward =
      velocity_forward_reward(ctx.robot_pos, ctx.goal, ctx.robot_vel);
  t.total = w.w_velocity_forward * t.velocity_forward;
  return t;
}

}  // namespace footwork::rewards
