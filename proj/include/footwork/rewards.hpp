#pragma once

#include <Eigen/Dense>

namespace footwork::rewards {

struct RewardWeights {
  double w_velocity_forward = 1.0;
  double w_ball_velocity_forward = 1.0;
  double w_bound_penalty = 1.0;
  double fall_penalty = 2.5;
  double win_bonus_scale = 1.0;
  double w_style = 0.5; // AMP blend
  double w_task = 0.5;
};

/// Curriculum bound that tightens from initial to final over the first
/// `decay` fraction of a training stage.
struct BoundSchedule {
  double initial_bound = 0.0;
  double final_bound = 0.0;
  double decay = 0.5;

  double active_bound(double progress) const;
};

/// unit(target - pos) . v. Returns 0 when pos is within 1e-6 of target
/// (direction undefined; only happens at task completion).
double velocity_forward_reward(const Eigen::Vector2d& pos,
                               const Eigen::Vector2d& target,
                               const Eigen::Vector2d& v);

/// unit(goal - ball) . ball_v, same degenerate rule.
double ball_velocity_forward_reward(const Eigen::Vector2d& ball,
                                    const Eigen::Vector2d& goal,
                                    const Eigen::Vector2d& ball_v);

/// Constant subtractive penalty once |deviation| exceeds the active bound.
double bound_penalty(double deviation, const BoundSchedule& schedule,
                     double progress, double penalty_weight);

/// Per-step state the kick/walk reward functions need beyond the raw world.
struct RewardContext {
  Eigen::Vector2d robot_pos{0.0, 0.0}; // ground-plane position (x, 0)
  Eigen::Vector2d robot_vel{0.0, 0.0}; // IMU-exposed planar velocity (true state)
  Eigen::Vector2d ball_pos{0.0, 0.0};
  Eigen::Vector2d ball_vel{0.0, 0.0};
  Eigen::Vector2d goal{0.0, 0.0};
  bool ball_contacted = false;   // a foot has touched the ball this episode
  double drift_since_contact = 0.0; // forward base travel since first contact
  double progress = 0.0;         // training progress in [0, 1]
  bool bounds_enabled = false;
};

struct RewardTerms {
  double velocity_forward = 0.0;
  double ball_velocity_forward = 0.0;
  double bound_penalty = 0.0;
  double total = 0.0;
};

RewardTerms kick_reward(const RewardContext& ctx, const RewardWeights& w,
                        const BoundSchedule& drift_bound,
                        const BoundSchedule& ball_back_bound);

RewardTerms walk_reward(const RewardContext& ctx, const RewardWeights& w);

}  // namespace footwork::rewards
