#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "footwork/domain_rand.hpp"
#include "footwork/dynamics.hpp"
#include "footwork/rewards.hpp"
#include "footwork/rng.hpp"
#include "footwork/sensors.hpp"

namespace footwork::env {

enum class TaskKind { Kick, Walk, Jump };

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind k);

struct GoalSampler {
  enum class Mode { Fixed, UniformInterval };
  Mode mode = Mode::Fixed;
  double lo = -1.0;
  double hi = 1.0;
};

struct TaskSpec {
  TaskKind kind = TaskKind::Walk;
  Eigen::Vector2d goal_position{1.0, 0.0};
  double ball_start_x = 0.2;          // ahead of the robot, kick task only
  int max_steps = 600;                // 5 s at 120 Hz
  double termination_height = 0.275;  // m, torso reference height
  bool include_feet_contacts = true;
  GoalSampler goal_sampler;
  double contact_threshold = 1.0e-3;  // m, foot contact sensor
  double win_distance = 0.1;          // m, walk completion radius
  rewards::RewardWeights weights;
  rewards::BoundSchedule drift_bound{0.5, 0.1, 0.5};
  rewards::BoundSchedule ball_back_bound{0.5, 0.05, 0.5};
  bool bounds_enabled = false;
  bool observation_normalization = false;
  bool quantize_joint_sensors = false;
};

/// Observation layout, in order: joint positions (N), joint velocities (N),
/// pitch rate (1), planar linear velocity (2), goal direction sign (1),
/// ball position relative to the robot (1, kick only), foot contact flags
/// (optional). Length is constant for a fixed task.
int observation_dim(const TaskSpec& task, const dynamics::RobotModel& model);

Eigen::VectorXd build_observation(const dynamics::WorldState& world,
                                  const TaskSpec& task,
                                  const dynamics::RobotModel& model,
                                  const sensors::ImuSample& imu,
                                  const Eigen::VectorXd& contacts,
                                  const Eigen::Vector2d& goal);

/// Clip to [-1, 1] then scale by pi: network outputs map onto the full
/// joint-target range.
Eigen::VectorXd scale_action(const Eigen::VectorXd& raw);

struct Termination {
  bool done = false;
  bool fell = false;
  bool timeout = false;
  bool task_complete = false;
};

Termination check_termination(const dynamics::WorldState& world,
                              const TaskSpec& task,
                              const dynamics::RobotModel& model);

struct StepInfo {
  bool fell = false;
  bool timeout = false;
  bool task_complete = false;
  bool ball_contact = false; // this step
  rewards::RewardTerms terms;
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

/// Online mean/variance normalizer (Welford), off by default.
class RunningNorm {
 public:
  void resize(int dim);
  void update(const Eigen::VectorXd& x);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  Eigen::VectorXd mean_, m2_;
  long count_ = 0;
};

/// One episode machine: owns its world and rng, steps at 120 Hz. Instances
/// are independent; a vectorized runner may step many in parallel.
class Environment {
 public:
  Environment(dynamics::RobotModel model, dynamics::SimParams sim, TaskSpec task,
              sensors::ImuNoiseSpec imu, train::DomainRandSpec rand,
              std::uint64_t seed);

  Eigen::VectorXd reset();
  StepResult step(const Eigen::VectorXd& scaled_action);
  /// Trainer entry point: scales the raw policy output into joint targets.
  StepResult step_raw(const Eigen::VectorXd& raw_action) {
    return step(scale_action(raw_action));
  }
  /// AMP transition features of the most recent step.
  Eigen::VectorXd last_amp_features() const;

  int observation_size() const { return obs_dim_; }
  int action_size() const { return base_model_.num_joints(); }
  double control_dt() const { return dt_; }

  const dynamics::WorldState& world() const { return world_; }
  const dynamics::RobotModel& model() const { return base_model_; }
  const TaskSpec& task() const { return task_; }
  const Eigen::Vector2d& goal() const { return goal_; }
  double torso_height() const;

  /// Curriculum progress in [0, 1]; tightens reward bounds.
  void set_progress(double p) { progress_ = p; }
  void set_randomization(const train::DomainRandSpec& spec) { rand_ = spec; }

  /// Sensor noise switch (oracle tests run noise-free; eval keeps noise on).
  void set_sensor_noise_enabled(bool on) { sensor_noise_ = on; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  void sample_goal();
  void activate_physics();
  double task_reward(rewards::RewardTerms& terms) const;

  dynamics::RobotModel base_model_;
  train::PhysicsBundle base_physics_;
  TaskSpec task_;
  train::DomainRandSpec rand_;
  Rng rng_;
  double dt_ = 1.0 / 120.0;

  // active (possibly randomized this episode) physics
  train::PhysicsBundle physics_;
  dynamics::RobotModel model_;

  dynamics::WorldState world_;
  dynamics::WorldState prev_world_;
  Eigen::Vector2d prev_base_vel_{0.0, 0.0};
  Eigen::Vector2d goal_{1.0, 0.0};
  bool ball_contacted_ = false;
  double contact_base_x_ = 0.0;
  double progress_ = 0.0;
  bool sensor_noise_ = true;
  sensors::ImuDrift drift_;
  RunningNorm norm_;
  int obs_dim_ = 0;
};

/// Robot standing at the ready pose with the lowest foot point preloaded to
/// static spring compression.
dynamics::WorldState standing_world(const dynamics::RobotModel& model,
                                    const dynamics::SimParams& sim);

}  // namespace footwork::env
