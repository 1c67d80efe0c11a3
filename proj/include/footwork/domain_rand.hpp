#pragma once

#include <vector>

#include "footwork/dynamics.hpp"
#include "footwork/rng.hpp"
#include "footwork/sensors.hpp"

namespace footwork::train {

/// Gaussian multiplicative perturbations of the simulation, resampled once
/// per episode.
struct DomainRandSpec {
  bool enabled = false;
  double gravity_std = 0.02;
  double friction_std = 0.10;
  double mass_std = 0.05;
  double pd_gain_std = 0.10;
  double sensor_noise_std = 0.10;
};

/// Everything the randomizer may touch, grouped so a perturbed copy can be
/// swapped in per episode.
struct PhysicsBundle {
  dynamics::SimParams sim;
  std::vector<dynamics::MotorSpec> motors;  // one per joint, model order
  sensors::ImuNoiseSpec imu;
  std::vector<double> mass_scale;           // one per link, applied to mass+inertia
};

PhysicsBundle bundle_from(const dynamics::RobotModel& model,
                          const dynamics::SimParams& sim,
                          const sensors::ImuNoiseSpec& imu);

/// Each targeted parameter is multiplied by (1 + N(0, std)) and clamped to
/// at least 1% of its base value. Draw order is fixed: gravity, friction,
/// link masses (model order), per-joint kp, per-joint kd, sensor noise
/// scale. Zero stds reproduce the base bitwise.
PhysicsBundle apply_randomization(const PhysicsBundle& base,
                                  const DomainRandSpec& spec, Rng& rng);

/// Scales link masses (and inertias, same geometry) by bundle.mass_scale.
dynamics::RobotModel scaled_model(const dynamics::RobotModel& base,
                                  const std::vector<double>& mass_scale);

}  // namespace footwork::train
