#pragma once

#include <Eigen/Dense>

#include "footwork/dynamics.hpp"
#include "footwork/rng.hpp"

namespace footwork::sensors {

/// Gaussian channel noise as a fraction of the sensor full scale
/// (LSM6DSOX-class part: accel 0.203% of +-4 g, gyro 0.804% of +-2000 deg/s).
struct ImuNoiseSpec {
  double accel_noise_frac = 0.00203;
  double gyro_noise_frac = 0.00804;
  double accel_full_scale = 4.0 * 9.80665;       // m/s^2
  double gyro_full_scale = 2000.0 * M_PI / 180.0; // rad/s
  bool include_gravity = true;

  double accel_sigma() const { return accel_noise_frac * accel_full_scale; }
  double gyro_sigma() const { return gyro_noise_frac * gyro_full_scale; }
};

struct ImuSample {
  Eigen::Vector2d linear_acceleration{0.0, 0.0}; // world x, z
  double angular_velocity = 0.0;                 // pitch rate
  Eigen::Vector2d linear_velocity{0.0, 0.0};
};

/// Finite-difference accelerometer + gyro. Acceleration is the velocity
/// delta over dt plus the gravity reaction (specific force), each channel
/// with Gaussian noise sigma = frac * full_scale. Pure given the rng state.
ImuSample imu_read(const Eigen::Vector2d& v_now, const Eigen::Vector2d& v_prev,
                   double omega, double dt, const ImuNoiseSpec& noise,
                   Rng& rng, double gravity = 9.81);

/// Optional slowly-varying bias, default off. Holds the random-walk state.
class ImuDrift {
 public:
  ImuDrift() = default;
  ImuDrift(bool enabled, double walk_std) : enabled_(enabled), walk_std_(walk_std) {}

  void apply(ImuSample& s, Rng& rng, double dt);
  void reset();
  bool enabled() const { return enabled_; }
  Eigen::Vector3d bias() const { return {accel_bias_.x(), accel_bias_.y(), gyro_bias_}; }

 private:
  bool enabled_ = false;
  double walk_std_ = 0.0;
  Eigen::Vector2d accel_bias_{0.0, 0.0};
  double gyro_bias_ = 0.0;
};

/// Per-point ground contact flags, exactly +1 (touching) or -1. Planar
/// layout: 2 points per foot, right foot first.
Eigen::VectorXd foot_contacts(const dynamics::WorldState& world,
                              const dynamics::RobotModel& model,
                              double threshold);

}  // namespace footwork::sensors
