#pragma once

#include <Eigen/Dense>
#include <vector>

#include "footwork/model.hpp"

namespace footwork::dynamics {

/// Generalized coordinates of robot + ball. A plain value: stepping never
/// shares mutable state, so worlds can be advanced concurrently.
struct WorldState {
  double base_x = 0.0, base_z = 0.0, base_pitch = 0.0;
  double base_vx = 0.0, base_vz = 0.0, base_pitch_rate = 0.0;
  Eigen::VectorXd q;   // joint angles, model order
  Eigen::VectorXd qd;  // joint velocities
  bool has_ball = false;
  double ball_x = 0.0, ball_z = 0.0;
  double ball_vx = 0.0, ball_vz = 0.0;
  double time_s = 0.0;
  long step_count = 0;

  bool all_finite() const;
};

WorldState make_world(const RobotModel& model);

/// Penalty-contact parameters shared by feet and ball.
struct ContactParams {
  double kn = 1.0e4;                // N/m normal stiffness
  double dn = 100.0;                // N*s/m normal damping
  double mu = 0.8;                  // Coulomb friction coefficient
  double restitution = 0.6;         // ball-foot restitution e
  double tangential_damping = 300.0; // N*s/m viscous regularization
};

struct BallParams {
  double mass = 0.205;             // kg
  double radius = 0.07;            // m
  double rolling_resistance = 0.05; // fraction of g decelerating a grounded ball
};

struct SimParams {
  ContactParams contact;
  BallParams ball;
  double gravity = 9.81; // m/s^2, acts along -z
  int substeps = 8;
};

/// PD torque with the linear torque-speed clamp: full stall torque is
/// available against the motion, and the budget tapers to zero at no-load
/// speed when driving with it.
double pd_torque(const MotorSpec& motor, double q, double qd, double target);

/// Ground reaction at a penetrating point. Returns (tangential, normal)
/// world force; zero unless penetration > 0.
Eigen::Vector2d contact_force(double penetration, double normal_vel,
                              double tangential_vel, const ContactParams& params);

/// World-frame pose/velocity of every link plus COM aggregates.
struct FrameKinematics {
  std::vector<double> angle;
  std::vector<Eigen::Vector2d> origin;
  std::vector<Eigen::Vector2d> origin_vel;
  std::vector<double> omega;
  std::vector<Eigen::Vector2d> com;
  std::vector<Eigen::Vector2d> com_vel;

  Eigen::Vector2d total_com(const RobotModel& m) const;
  Eigen::Vector2d total_com_vel(const RobotModel& m) const;
};

FrameKinematics compute_fk(const RobotModel& model, const WorldState& ws);

/// World positions/velocities of every foot contact point, feet order then
/// point order.
struct ContactPointState {
  Eigen::Vector2d pos;
  Eigen::Vector2d vel;
  int link = -1;
};
std::vector<ContactPointState> foot_contact_states(const RobotModel& model,
                                                   const FrameKinematics& fk);

/// Kinetic + gravitational potential energy of the robot (ball excluded).
double mechanical_energy(const RobotModel& model, const WorldState& ws,
                         double gravity);

struct StepEvents {
  bool ball_foot_contact = false;
  double ball_impulse = 0.0; // |impulse| applied to the ball this step, N*s
};

/// Advances one control period (dt, default 1/120 s) with the given PD
/// targets. Throws NumericalDivergence if the state leaves the finite range.
WorldState step(const WorldState& world, const RobotModel& model,
                const Eigen::VectorXd& targets, const SimParams& params,
                double dt, StepEvents* events = nullptr);

/// Torques each motor would apply right now (diagnostics and tests).
Eigen::VectorXd motor_torques(const RobotModel& model, const WorldState& ws,
                              const Eigen::VectorXd& targets);

}  // namespace footwork::dynamics
