#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "footwork/adam.hpp"
#include "footwork/dynamics.hpp"
#include "footwork/mlp.hpp"
#include "footwork/rng.hpp"

namespace footwork::rl {

/// Reference motion: joint-angle frames plus base height, fixed frame rate.
/// File format: `dt = <s>` and `joints = <comma list>` header lines, then one
/// whitespace-separated row per frame (N angles followed by base height).
struct MotionClip {
  double dt = 1.0 / 30.0;
  std::vector<std::string> joint_names;
  Eigen::MatrixXd frames;     // (N x F)
  Eigen::VectorXd base_height; // (F)

  int num_frames() const { return static_cast<int>(frames.cols()); }
};

MotionClip load_motion_clip(const std::string& path);
void save_motion_clip(const std::string& path, const MotionClip& clip);

/// Keyframed crouch-extend-flight-land cycle at 30 Hz, kinematically
/// consistent with the model's leg geometry (stance height from leg FK,
/// ballistic height during flight).
MotionClip generate_jump_clip(const dynamics::RobotModel& model, int cycles = 3);

struct AmpConfig {
  bool enabled = false;
  std::vector<int> disc_hidden{128, 64};
  std::string feature_tag = "joints+torso"; // documented layout below
  double w_style = 0.5;
  double w_task = 0.5;
  double gradient_penalty = 10.0;
  int replay_size = 32768;
  double disc_lr = 1e-4;
  int disc_minibatch = 256;
  int disc_steps = 2; // discriminator updates per training iteration
  std::string clip_file;
};

/// Transition features: joint angles, joint velocities, torso height, torso
/// planar velocity, torso pitch -- 2N+4 entries.
Eigen::VectorXd amp_features(const dynamics::WorldState& prev,
                             const dynamics::WorldState& cur,
                             const dynamics::RobotModel& model);

int amp_feature_dim(const dynamics::RobotModel& model);

/// Features for every consecutive clip frame pair; velocities by finite
/// difference, planar x-velocity and pitch are zero in clip space.
Eigen::MatrixXd clip_transition_features(const MotionClip& clip);

struct DiscriminatorStats {
  double loss = 0.0;
  double real_accuracy = 0.0; // fraction of real scored > 0
  double fake_accuracy = 0.0; // fraction of fake scored < 0
  double gradient_penalty = 0.0;
};

/// One least-squares GAN update: real target +1, fake target -1, gradient
/// penalty on the real batch. Batches are (feature_dim x batch) columns.
DiscriminatorStats discriminator_step(net::Mlp& disc, net::Adam& opt,
                                      const Eigen::MatrixXd& real_batch,
                                      const Eigen::MatrixXd& fake_batch,
                                      const AmpConfig& config);

/// max(0, 1 - 0.25*(d-1)^2), always in [0, 1].
double style_reward(double disc_output);

}  // namespace footwork::rl
