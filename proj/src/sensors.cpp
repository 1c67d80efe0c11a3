#include "footwork/sensors.hpp"

namespace footwork::sensors {

ImuSample imu_read(const Eigen::Vector2d& v_now, const Eigen::Vector2d& v_prev,
                   double omega, double dt, const ImuNoiseSpec& noise, Rng& rng,
                   double gravity) {
  ImuSample s;
  s.linear_acceleration = (v_now - v_prev) / dt;
  if (noise.include_gravity) s.linear_acceleration.y() += gravity;
  if (noise.accel_noise_frac > 0.0) {
    const double sigma = noise.accel_sigma();
    s.linear_acceleration.x() += rng.normal(0.0, sigma);
    s.linear_acceleration.y() += rng.normal(0.0, sigma);
  }
  s.angular_velocity = omega;
  if (noise.gyro_noise_frac > 0.0)
    s.angular_velocity += rng.normal(0.0, noise.gyro_sigma());
  s.linear_velocity = v_now;
  return s;
}

void ImuDrift::apply(ImuSample& s, Rng& rng, double dt) {
  if (!enabled_) return;
  const double step = walk_std_ * std::sqrt(dt);
  accel_bias_.x() += rng.normal(0.0, step);
  accel_bias_.y() += rng.normal(0.0, step);
  gyro_bias_ += rng.normal(0.0, step);
  s.linear_acceleration += accel_bias_;
  s.angular_velocity += gyro_bias_;
}

void ImuDrift::reset() {
  accel_bias_.setZero();
  gyro_bias_ = 0.0;
}

Eigen::VectorXd foot_contacts(const dynamics::WorldState& world,
                              const dynamics::RobotModel& model,
                              double threshold) {
  const auto fk = dynamics::compute_fk(model, world);
  const auto points = dynamics::foot_contact_states(model, fk);
  Eigen::VectorXd flags(points.size());
  for (size_t i = 0; i < points.size(); ++i)
    flags[i] = points[i].pos.y() <= threshold ? 1.0 : -1.0;
  return flags;
}

}  // namespace footwork::sensors
