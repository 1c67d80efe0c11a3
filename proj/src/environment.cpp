#include "footwork/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "footwork/amp.hpp"
#include "footwork/binio.hpp"
#include "footwork/errors.hpp"

namespace footwork::env {

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "kick") return TaskKind::Kick;
  if (s == "walk") return TaskKind::Walk;
  if (s == "jump") return TaskKind::Jump;
  throw ValidationError("unknown task kind '" + s + "' (kick|walk|jump)");
}

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Kick: return "kick";
    case TaskKind::Walk: return "walk";
    case TaskKind::Jump: return "jump";
  }
  return "?";
}

int observation_dim(const TaskSpec& task, const dynamics::RobotModel& model) {
  const int n = model.num_joints();
  int dim = n + n + 1 + 2 + 1;
  if (task.kind == TaskKind::Kick) dim += 1;
  if (task.include_feet_contacts) dim += model.total_contact_points();
  return dim;
}

Eigen::VectorXd build_observation(const dynamics::WorldState& world,
                                  const TaskSpec& task,
                                  const dynamics::RobotModel& model,
                                  const sensors::ImuSample& imu,
                                  const Eigen::VectorXd& contacts,
                                  const Eigen::Vector2d& goal) {
  const int n = model.num_joints();
  Eigen::VectorXd obs(observation_dim(task, model));
  int at = 0;
  if (task.quantize_joint_sensors) {
    for (int j = 0; j < n; ++j) {
      const double res = model.joints[j].motor.position_resolution;
      obs[at + j] = res > 0.0 ? std::round(world.q[j] / res) * res : world.q[j];
    }
  } else {
    obs.segment(at, n) = world.q;
  }
  at += n;
  obs.segment(at, n) = world.qd;
  at += n;
  obs[at++] = imu.angular_velocity;
  obs[at++] = imu.linear_velocity.x();
  obs[at++] = imu.linear_velocity.y();
  const double dx = goal.x() - world.base_x;
  obs[at++] = std::abs(dx) < 1e-6 ? 0.0 : (dx > 0.0 ? 1.0 : -1.0);
  if (task.kind == TaskKind::Kick) obs[at++] = world.ball_x - world.base_x;
  if (task.include_feet_contacts) {
    obs.segment(at, contacts.size()) = contacts;
    at += static_cast<int>(contacts.size());
  }
  return obs;
}

Eigen::VectorXd scale_action(const Eigen::VectorXd& raw) {
  return raw.cwiseMax(-1.0).cwiseMin(1.0) * M_PI;
}

Termination check_termination(const dynamics::WorldState& world,
                              const TaskSpec& task,
                              const dynamics::RobotModel& model) {
  Termination t;
  const auto fk = dynamics::compute_fk(model, world);
  t.fell = fk.com[model.torso_link].y() < task.termination_height;
  t.timeout = world.step_count >= task.max_steps;
  if (task.kind == TaskKind::Walk)
    t.task_complete =
        std::abs(world.base_x - task.goal_position.x()) <= task.win_distance;
  t.done = t.fell || t.timeout || t.task_complete;
  return t;
}

void RunningNorm::resize(int dim) {
  mean_ = Eigen::VectorXd::Zero(dim);
  m2_ = Eigen::VectorXd::Zero(dim);
  count_ = 0;
}

void RunningNorm::update(const Eigen::VectorXd& x) {
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / count_;
  m2_ += delta.cwiseProduct(x - mean_);
}

Eigen::VectorXd RunningNorm::apply(const Eigen::VectorXd& x) const {
  if (count_ < 2) return x;
  const Eigen::VectorXd var = m2_ / (count_ - 1);
  return (x - mean_).cwiseQuotient((var.array() + 1e-8).sqrt().matrix());
}

void RunningNorm::save(std::ostream& os) const {
  binio::put_i64(os, count_);
  binio::put_vec(os, mean_);
  binio::put_vec(os, m2_);
}

void RunningNorm::load(std::istream& is) {
  count_ = binio::get_i64(is);
  mean_ = binio::get_vec(is);
  m2_ = binio::get_vec(is);
}

dynamics::WorldState standing_world(const dynamics::RobotModel& model,
                                    const dynamics::SimParams& sim) {
  dynamics::WorldState ws = dynamics::make_world(model);
  ws.q = model.ready_pose;
  // place the base so the lowest foot point carries its static share
  const auto fk = dynamics::compute_fk(model, ws);
  const auto points = dynamics::foot_contact_states(model, fk);
  double lowest = 0.0;
  for (const auto& p : points) lowest = std::min(lowest, p.pos.y());
  const double preload =
      model.total_mass() * sim.gravity / (sim.contact.kn * points.size());
  ws.base_z = -lowest - preload;
  return ws;
}

Environment::Environment(dynamics::RobotModel model, dynamics::SimParams sim,
                         TaskSpec task, sensors::ImuNoiseSpec imu,
                         train::DomainRandSpec rand, std::uint64_t seed)
    : base_model_(std::move(model)),
      task_(std::move(task)),
      rand_(rand),
      rng_(seed),
      model_(base_model_) {
  base_physics_ = train::bundle_from(base_model_, sim, imu);
  physics_ = base_physics_;
  obs_dim_ = observation_dim(task_, base_model_);
  norm_.resize(obs_dim_);
  world_ = standing_world(base_model_, physics_.sim);
  prev_world_ = world_;
}

Eigen::VectorXd Environment::last_amp_features() const {
  return rl::amp_features(prev_world_, world_, model_);
}

void Environment::activate_physics() {
  if (rand_.enabled) {
    physics_ = train::apply_randomization(base_physics_, rand_, rng_);
    model_ = train::scaled_model(base_model_, physics_.mass_scale);
    for (int j = 0; j < model_.num_joints(); ++j)
      model_.joints[j].motor = physics_.motors[j];
  } else {
    physics_ = base_physics_;
    model_ = base_model_;
  }
}

void Environment::sample_goal() {
  if (task_.kind != TaskKind::Walk ||
      task_.goal_sampler.mode == GoalSampler::Mode::Fixed) {
    goal_ = task_.goal_position;
    return;
  }
  // resample goals that would complete immediately
  double x;
  do {
    x = rng_.uniform(task_.goal_sampler.lo, task_.goal_sampler.hi);
  } while (std::abs(x) < task_.win_distance * 2.0);
  goal_ = {x, 0.0};
}

Eigen::VectorXd Environment::reset() {
  activate_physics();
  world_ = standing_world(model_, physics_.sim);
  if (task_.kind == TaskKind::Kick) {
    world_.has_ball = true;
    world_.ball_x = task_.ball_start_x;
    world_.ball_z = physics_.sim.ball.radius;
    world_.ball_vx = 0.0;
    world_.ball_vz = 0.0;
  }
  sample_goal();
  prev_world_ = world_;
  prev_base_vel_.setZero();
  ball_contacted_ = false;
  contact_base_x_ = 0.0;
  drift_.reset();

  sensors::ImuSample imu;
  imu.linear_velocity.setZero();
  const Eigen::VectorXd contacts =
      sensors::foot_contacts(world_, model_, task_.contact_threshold);
  Eigen::VectorXd obs =
      build_observation(world_, task_, model_, imu, contacts, goal_);
  if (task_.observation_normalization) {
    norm_.update(obs);
    obs = norm_.apply(obs);
  }
  return obs;
}

double Environment::torso_height() const {
  const auto fk = dynamics::compute_fk(model_, world_);
  return fk.com[model_.torso_link].y();
}

double Environment::task_reward(rewards::RewardTerms& terms) const {
  rewards::RewardContext ctx;
  ctx.robot_pos = {world_.base_x, 0.0};
  ctx.robot_vel = {world_.base_vx, 0.0};
  ctx.ball_pos = {world_.ball_x, 0.0};
  ctx.ball_vel = {world_.ball_vx, 0.0};
  ctx.goal = {goal_.x(), 0.0};
  ctx.ball_contacted = ball_contacted_;
  ctx.drift_since_contact =
      ball_contacted_ ? std::max(0.0, world_.base_x - contact_base_x_) : 0.0;
  ctx.progress = progress_;
  ctx.bounds_enabled = task_.bounds_enabled;

  switch (task_.kind) {
    case TaskKind::Kick:
      terms = rewards::kick_reward(ctx, task_.weights, task_.drift_bound,
                                   task_.ball_back_bound);
      return terms.total;
    case TaskKind::Walk:
      terms = rewards::walk_reward(ctx, task_.weights);
      return terms.total;
    case TaskKind::Jump:
      terms = {};
      return 0.0; // style-only task: the trainer blends in the AMP reward
  }
  return 0.0;
}

StepResult Environment::step(const Eigen::VectorXd& scaled_action) {
  Eigen::VectorXd targets = scaled_action;
  for (int j = 0; j < model_.num_joints(); ++j)
    targets[j] = std::clamp(targets[j], model_.joints[j].limit_lo,
                            model_.joints[j].limit_hi);

  dynamics::StepEvents ev;
  prev_world_ = world_;
  world_ = dynamics::step(world_, model_, targets, physics_.sim, dt_, &ev);

  if (ev.ball_foot_contact && !ball_contacted_) {
    ball_contacted_ = true;
    contact_base_x_ = world_.base_x;
  }

  const Eigen::Vector2d v_now(world_.base_vx, world_.base_vz);
  sensors::ImuNoiseSpec active_noise = physics_.imu;
  if (!sensor_noise_) {
    active_noise.accel_noise_frac = 0.0;
    active_noise.gyro_noise_frac = 0.0;
  }
  sensors::ImuSample imu =
      sensors::imu_read(v_now, prev_base_vel_, world_.base_pitch_rate, dt_,
                        active_noise, rng_, physics_.sim.gravity);
  drift_.apply(imu, rng_, dt_);
  prev_base_vel_ = v_now;

  const Eigen::VectorXd contacts =
      sensors::foot_contacts(world_, model_, task_.contact_threshold);

  StepResult out;
  out.observation = build_observation(world_, task_, model_, imu, contacts, goal_);
  if (task_.observation_normalization) {
    norm_.update(out.observation);
    out.observation = norm_.apply(out.observation);
  }

  const double reward = task_reward(out.info.terms);
  const Termination term = check_termination(world_, task_, model_);
  out.done = term.done;
  out.info.fell = term.fell;
  out.info.timeout = term.timeout;
  out.info.task_complete = term.task_complete;
  out.info.ball_contact = ev.ball_foot_contact;

  if (term.fell) {
    // fall zeroes the step reward and charges the penalty
    out.reward = -task_.weights.fall_penalty;
  } else {
    out.reward = reward;
    if (term.task_complete)
      out.reward += task_.weights.win_bonus_scale *
                    static_cast<double>(task_.max_steps - world_.step_count);
  }
  return out;
}

void Environment::save(std::ostream& os) const {
  const auto& w = world_;
  binio::put_f64(os, w.base_x);
  binio::put_f64(os, w.base_z);
  binio::put_f64(os, w.base_pitch);
  binio::put_f64(os, w.base_vx);
  binio::put_f64(os, w.base_vz);
  binio::put_f64(os, w.base_pitch_rate);
  binio::put_vec(os, w.q);
  binio::put_vec(os, w.qd);
  binio::put_u64(os, w.has_ball ? 1 : 0);
  binio::put_f64(os, w.ball_x);
  binio::put_f64(os, w.ball_z);
  binio::put_f64(os, w.ball_vx);
  binio::put_f64(os, w.ball_vz);
  binio::put_f64(os, w.time_s);
  binio::put_i64(os, w.step_count);

  binio::put_f64(os, prev_base_vel_.x());
  binio::put_f64(os, prev_base_vel_.y());
  binio::put_f64(os, goal_.x());
  binio::put_f64(os, goal_.y());
  binio::put_u64(os, ball_contacted_ ? 1 : 0);
  binio::put_f64(os, contact_base_x_);
  binio::put_f64(os, progress_);

  // active randomized physics
  binio::put_f64(os, physics_.sim.gravity);
  binio::put_f64(os, physics_.sim.contact.mu);
  binio::put_f64(os, physics_.imu.accel_noise_frac);
  binio::put_f64(os, physics_.imu.gyro_noise_frac);
  binio::put_u64(os, physics_.mass_scale.size());
  for (double s : physics_.mass_scale) binio::put_f64(os, s);
  binio::put_u64(os, physics_.motors.size());
  for (const auto& m : physics_.motors) {
    binio::put_f64(os, m.kp);
    binio::put_f64(os, m.kd);
  }

  norm_.save(os);
  std::ostringstream rng_text;
  rng_.save(rng_text);
  binio::put_string(os, rng_text.str());
}

void Environment::load(std::istream& is) {
  auto& w = world_;
  w.base_x = binio::get_f64(is);
  w.base_z = binio::get_f64(is);
  w.base_pitch = binio::get_f64(is);
  w.base_vx = binio::get_f64(is);
  w.base_vz = binio::get_f64(is);
  w.base_pitch_rate = binio::get_f64(is);
  w.q = binio::get_vec(is);
  w.qd = binio::get_vec(is);
  w.has_ball = binio::get_u64(is) != 0;
  w.ball_x = binio::get_f64(is);
  w.ball_z = binio::get_f64(is);
  w.ball_vx = binio::get_f64(is);
  w.ball_vz = binio::get_f64(is);
  w.time_s = binio::get_f64(is);
  w.step_count = binio::get_i64(is);

  prev_base_vel_.x() = binio::get_f64(is);
  prev_base_vel_.y() = binio::get_f64(is);
  goal_.x() = binio::get_f64(is);
  goal_.y() = binio::get_f64(is);
  ball_contacted_ = binio::get_u64(is) != 0;
  contact_base_x_ = binio::get_f64(is);
  progress_ = binio::get_f64(is);

  physics_ = base_physics_;
  physics_.sim.gravity = binio::get_f64(is);
  physics_.sim.contact.mu = binio::get_f64(is);
  physics_.imu.accel_noise_frac = binio::get_f64(is);
  physics_.imu.gyro_noise_frac = binio::get_f64(is);
  const auto n_scale = binio::get_u64(is);
  physics_.mass_scale.resize(n_scale);
  for (auto& s : physics_.mass_scale) s = binio::get_f64(is);
  const auto n_motor = binio::get_u64(is);
  if (n_motor != physics_.motors.size())
    throw CorruptFile("environment state: motor count mismatch");
  for (auto& m : physics_.motors) {
    m.kp = binio::get_f64(is);
    m.kd = binio::get_f64(is);
  }
  model_ = train::scaled_model(base_model_, physics_.mass_scale);
  for (int j = 0; j < model_.num_joints(); ++j)
    model_.joints[j].motor = physics_.motors[j];

  norm_.load(is);
  std::istringstream rng_text(binio::get_string(is));
  rng_.load(rng_text);
}

}  // namespace footwork::env
