#include "footwork/domain_rand.hpp"

#include <algorithm>

namespace footwork::train {

namespace {
// multiplicative draw, never below 1% of base
double perturb(double base, double std, Rng& rng) {
  const double v = base * (1.0 + rng.normal(0.0, std));
  return std::max(v, 0.01 * base);
}
}  // namespace

PhysicsBundle bundle_from(const dynamics::RobotModel& model,
                          const dynamics::SimParams& sim,
                          const sensors::ImuNoiseSpec& imu) {
  PhysicsBundle b;
  b.sim = sim;
  b.imu = imu;
  for (const auto& j : model.joints) b.motors.push_back(j.motor);
  b.mass_scale.assign(model.num_links(), 1.0);
  return b;
}

PhysicsBundle apply_randomization(const PhysicsBundle& base,
                                  const DomainRandSpec& spec, Rng& rng) {
  PhysicsBundle out = base;
  if (!spec.enabled) return out;
  out.sim.gravity = perturb(base.sim.gravity, spec.gravity_std, rng);
  out.sim.contact.mu = perturb(base.sim.contact.mu, spec.friction_std, rng);
  for (size_t i = 0; i < out.mass_scale.size(); ++i)
    out.mass_scale[i] = perturb(base.mass_scale[i], spec.mass_std, rng);
  for (auto& m : out.motors) m.kp = perturb(m.kp, spec.pd_gain_std, rng);
  for (auto& m : out.motors) m.kd = perturb(m.kd, spec.pd_gain_std, rng);
  const double sensor_scale =
      std::max(0.01, 1.0 + rng.normal(0.0, spec.sensor_noise_std));
  out.imu.accel_noise_frac = base.imu.accel_noise_frac * sensor_scale;
  out.imu.gyro_noise_frac = base.imu.gyro_noise_frac * sensor_scale;
  return out;
}

dynamics::RobotModel scaled_model(const dynamics::RobotModel& base,
                                  const std::vector<double>& mass_scale) {
  dynamics::RobotModel m = base;
  for (size_t i = 0; i < mass_scale.size() && i < m.links.size(); ++i) {
    m.links[i].mass *= mass_scale[i];
    m.links[i].inertia *= mass_scale[i];
  }
  return m;
}

}  // namespace footwork::train
