#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace footwork {
class Config;
}

namespace footwork::dynamics {

/// Position-controlled servo: PD torque clamped by a linear torque-speed
/// curve between stall torque and no-load speed.
struct MotorSpec {
  double stall_torque = 0.0;        // N*m
  double no_load_speed = 0.0;       // rad/s
  double position_resolution = 0.0; // rad (encoder step)
  double kp = 0.0;                  // N*m per rad
  double kd = 0.0;                  // N*m per rad/s
};

/// One rigid link. The link frame sits at the inboard joint; the link
/// extends along `axis` (unit, in link frame) and the COM lies com_offset
/// metres along it.
struct LinkSpec {
  std::string name;
  double mass = 0.0;       // kg
  double length = 0.0;     // m
  double com_offset = 0.0; // m along axis
  double inertia = 0.0;    // kg*m^2 about COM
  Eigen::Vector2d axis{0.0, -1.0};
};

/// Planar revolute joint. The child frame origin coincides with the joint;
/// `anchor` locates the joint in the parent frame; mount_angle is the fixed
/// child-at-zero orientation offset.
struct JointSpec {
  std::string name;
  int parent = -1;
  int child = -1;
  Eigen::Vector2d anchor{0.0, 0.0};
  double mount_angle = 0.0;
  double limit_lo = 0.0; // rad
  double limit_hi = 0.0; // rad
  MotorSpec motor;
};

/// Contact points of one foot, in the foot link frame. Order is preserved
/// into the contact vector (canonical model: heel then toe).
struct FootSpec {
  int link = -1;
  std::vector<Eigen::Vector2d> points;
};

struct RobotModel {
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints; // actuation order, parents before children
  std::vector<FootSpec> feet;    // right foot first, then left
  Eigen::VectorXd ready_pose;    // one target per joint
  int torso_link = 0;
  int head_link = -1;
  bool fixed_base = false;       // weld the root (test rigs: pendulum)

  // derived, filled by finalize()
  std::vector<std::vector<int>> joint_path; // per link: joints from root

  int num_joints() const { return static_cast<int>(joints.size()); }
  int num_links() const { return static_cast<int>(links.size()); }
  /// Generalized-velocity dimension: base (x, z, pitch) + joints.
  int dof() const { return (fixed_base ? 0 : 3) + num_joints(); }
  double total_mass() const;
  int total_contact_points() const;

  /// Computes joint paths and validates invariants (throws ValidationError).
  void finalize();
};

/// The planar analog of the target platform: torso, per-leg hip/knee/ankle,
/// one shoulder per arm, head pitch. 9 actuated joints, 2.3 kg, ~0.50 m
/// standing head height. Leg servos use the MX28 spec, arm/head the AX12.
RobotModel build_canonical_model();

MotorSpec mx28_spec();
MotorSpec ax12_spec();

/// Loads a robot from the sectioned plain-text format ([link x], [joint y],
/// [motor z], [foot f], [robot]). See configs/robot_canonical.cfg.
RobotModel load_robot_model(const footwork::Config& cfg);
RobotModel load_robot_model_file(const std::string& path);

}  // namespace footwork::dynamics
