#include "footwork/model.hpp"

#include <cmath>
#include <map>
#include <set>

#include "footwork/config.hpp"
#include "footwork/errors.hpp"

namespace footwork::dynamics {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRpmToRadS = 2.0 * M_PI / 60.0;
}  // namespace

MotorSpec mx28_spec() {
  MotorSpec m;
  m.stall_torque = 2.5;
  m.no_load_speed = 55.0 * kRpmToRadS;
  m.position_resolution = 0.33 * kDegToRad;
  m.kp = 8.0;
  m.kd = 0.2;
  return m;
}

MotorSpec ax12_spec() {
  MotorSpec m;
  m.stall_torque = 1.5;
  m.no_load_speed = 59.0 * kRpmToRadS;
  m.position_resolution = 0.29 * kDegToRad;
  m.kp = 8.0;
  m.kd = 0.2;
  return m;
}

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const auto& l : links) m += l.mass;
  return m;
}

int RobotModel::total_contact_points() const {
  int n = 0;
  for (const auto& f : feet) n += static_cast<int>(f.points.size());
  return n;
}

void RobotModel::finalize() {
  const int nl = num_links();
  const int nj = num_joints();
  if (nl == 0) throw ValidationError("robot model has no links");
  if (static_cast<int>(ready_pose.size()) != nj)
    throw ValidationError("ready_pose size != joint count");

  std::vector<int> parent_of(nl, -1);
  std::vector<int> joint_of(nl, -1);
  for (int j = 0; j < nj; ++j) {
    const auto& js = joints[j];
    if (js.parent < 0 || js.parent >= nl || js.child <= 0 || js.child >= nl)
      throw ValidationError("joint '" + js.name + "' references invalid links");
    if (js.parent >= js.child)
      throw ValidationError("joints must list parents before children ('" +
                            js.name + "')");
    if (parent_of[js.child] != -1)
      throw ValidationError("link has two inboard joints ('" + js.name + "')");
    parent_of[js.child] = js.parent;
    joint_of[js.child] = j;
    if (!(js.limit_lo < js.limit_hi))
      throw ValidationError("joint '" + js.name + "' has limit_lo >= limit_hi");
    if (ready_pose[j] < js.limit_lo || ready_pose[j] > js.limit_hi)
      throw ValidationError("ready pose violates limits of joint '" + js.name + "'");
    const auto& m = js.motor;
    if (!(m.stall_torque > 0.0) || !(m.no_load_speed > 0.0) || !(m.kp > 0.0) ||
        m.kd < 0.0)
      throw ValidationError("joint '" + js.name + "' has an invalid motor spec");
  }
  for (int l = 1; l < nl; ++l)
    if (parent_of[l] == -1)
      throw ValidationError("link '" + links[l].name + "' is not attached");
  for (const auto& l : links) {
    if (!(l.mass > 0.0) || !(l.inertia > 0.0))
      throw ValidationError("link '" + l.name + "' needs positive mass and inertia");
    if (l.com_offset < 0.0 || l.com_offset > l.length)
      throw ValidationError("link '" + l.name + "' com_offset outside [0, length]");
  }
  for (const auto& f : feet) {
    if (f.link < 0 || f.link >= nl)
      throw ValidationError("foot references invalid link");
    if (f.points.empty()) throw ValidationError("foot without contact points");
  }

  joint_path.assign(nl, {});
  for (int l = 1; l < nl; ++l) {
    std::vector<int> path;
    int cur = l;
    while (cur != 0) {
      path.push_back(joint_of[cur]);
      cur = parent_of[cur];
    }
    joint_path[l].assign(path.rbegin(), path.rend());
  }
}

RobotModel build_canonical_model() {
  RobotModel m;
  const double total = 2.3;

  auto rod = [&](const std::string& name, double frac, double length,
                 double com_offset, Eigen::Vector2d axis) {
    LinkSpec l;
    l.name = name;
    l.mass = frac * total;
    l.length = length;
    l.com_offset = com_offset;
    l.inertia = l.mass * length * length / 12.0;
    l.axis = std::move(axis);
    return l;
  };

  // 0      1        2        3       4        5        6       7      8      9
  // torso, r_thigh, r_shank, r_foot, l_thigh, l_shank, l_foot, r_arm, l_arm, head
  m.links.push_back(rod("torso", 0.40, 0.20, 0.10, {0.0, 1.0}));
  for (const char* side : {"r", "l"}) {
    m.links.push_back(rod(std::string(side) + "_thigh", 0.08, 0.12, 0.06, {0.0, -1.0}));
    m.links.push_back(rod(std::string(side) + "_shank", 0.08, 0.12, 0.06, {0.0, -1.0}));
    m.links.push_back(rod(std::string(side) + "_foot", 0.08, 0.11, 0.015, {1.0, 0.0}));
  }
  m.links.push_back(rod("r_arm", 0.04, 0.14, 0.07, {0.0, -1.0}));
  m.links.push_back(rod("l_arm", 0.04, 0.14, 0.07, {0.0, -1.0}));
  m.links.push_back(rod("head", 0.04, 0.07, 0.035, {0.0, 1.0}));

  auto joint = [&](const std::string& name, int parent, int child,
                   Eigen::Vector2d anchor, double lo, double hi,
                   const MotorSpec& motor) {
    JointSpec j;
    j.name = name;
    j.parent = parent;
    j.child = child;
    j.anchor = std::move(anchor);
    j.limit_lo = lo;
    j.limit_hi = hi;
    j.motor = motor;
    return j;
  };

  const MotorSpec mx = mx28_spec();
  const MotorSpec ax = ax12_spec();
  m.joints.push_back(joint("r_hip", 0, 1, {0.0, 0.0}, -2.6, 2.6, mx));
  m.joints.push_back(joint("r_knee", 1, 2, {0.0, -0.12}, -2.6, 0.2, mx));
  m.joints.push_back(joint("r_ankle", 2, 3, {0.0, -0.12}, -2.6, 2.6, mx));
  m.joints.push_back(joint("l_hip", 0, 4, {0.0, 0.0}, -2.6, 2.6, mx));
  m.joints.push_back(joint("l_knee", 4, 5, {0.0, -0.12}, -2.6, 0.2, mx));
  m.joints.push_back(joint("l_ankle", 5, 6, {0.0, -0.12}, -2.6, 2.6, mx));
  m.joints.push_back(joint("r_shoulder", 0, 7, {0.0, 0.18}, -2.6, 2.6, ax));
  m.joints.push_back(joint("l_shoulder", 0, 8, {0.0, 0.18}, -2.6, 2.6, ax));
  m.joints.push_back(joint("head", 0, 9, {0.0, 0.20}, -2.6, 2.6, ax));

  m.ready_pose.resize(9);
  m.ready_pose << 0.564, -1.176, 0.613, 0.564, -1.176, 0.613, 1.5, 1.5, 0.0;

  // heel then toe; ankle sits 3 cm above the sole
  m.feet.push_back({3, {{-0.04, -0.03}, {0.07, -0.03}}});
  m.feet.push_back({6, {{-0.04, -0.03}, {0.07, -0.03}}});

  m.torso_link = 0;
  m.head_link = 9;
  m.finalize();
  return m;
}

namespace {

MotorSpec motor_from_section(const Config::Section& s) {
  MotorSpec m;
  m.stall_torque = s.require_double("stall_torque");
  m.no_load_speed = s.require_double("no_load_speed");
  m.position_resolution = s.get_double("position_resolution", 0.0);
  m.kp = s.require_double("kp");
  m.kd = s.require_double("kd");
  return m;
}

Eigen::Vector2d vec2_from(const Config::Section& s, const std::string& key,
                          Eigen::Vector2d def) {
  auto v = s.get_doubles(key, {def.x(), def.y()});
  if (v.size() != 2)
    throw ValidationError("'" + key + "' must be two comma-separated numbers");
  return {v[0], v[1]};
}

}  // namespace

RobotModel load_robot_model(const footwork::Config& cfg) {
  RobotModel m;
  std::map<std::string, MotorSpec> motors;
  motors["mx28"] = mx28_spec();
  motors["ax12"] = ax12_spec();
  for (const auto* s : cfg.all("motor")) {
    MotorSpec spec = motor_from_section(*s);
    motors[s->name] = spec;
  }

  std::map<std::string, int> link_index;
  for (const auto* s : cfg.all("link")) {
    LinkSpec l;
    l.name = s->name;
    l.mass = s->require_double("mass");
    l.length = s->require_double("length");
    l.com_offset = s->get_double("com_offset", l.length / 2.0);
    l.inertia = s->get_double("inertia", l.mass * l.length * l.length / 12.0);
    l.axis = vec2_from(*s, "axis", {0.0, -1.0});
    link_index[l.name] = static_cast<int>(m.links.size());
    m.links.push_back(std::move(l));
  }

  auto link_id = [&](const std::string& name) {
    auto it = link_index.find(name);
    if (it == link_index.end())
      throw ValidationError("unknown link '" + name + "' in robot config");
    return it->second;
  };

  std::vector<double> ready;
  for (const auto* s : cfg.all("joint")) {
    JointSpec j;
    j.name = s->name;
    j.parent = link_id(s->require_string("parent"));
    j.child = link_id(s->require_string("child"));
    j.anchor = vec2_from(*s, "anchor", {0.0, 0.0});
    j.mount_angle = s->get_double("mount_angle", 0.0);
    j.limit_lo = s->require_double("limit_lo");
    j.limit_hi = s->require_double("limit_hi");
    std::string motor_name = s->require_string("motor");
    auto it = motors.find(motor_name);
    if (it == motors.end())
      throw ValidationError("unknown motor '" + motor_name + "' in joint '" +
                            j.name + "'");
    j.motor = it->second;
    ready.push_back(s->require_double("ready"));
    m.joints.push_back(std::move(j));
  }
  m.ready_pose = Eigen::Map<Eigen::VectorXd>(ready.data(), ready.size());

  for (const auto* s : cfg.all("foot")) {
    FootSpec f;
    f.link = link_id(s->require_string("link"));
    auto pts = s->get_doubles("points", {});
    if (pts.empty() || pts.size() % 2 != 0)
      throw ValidationError("[foot " + s->name + "] points must be x,z pairs");
    for (size_t i = 0; i + 1 < pts.size(); i += 2)
      f.points.push_back({pts[i], pts[i + 1]});
    m.feet.push_back(std::move(f));
  }

  if (const auto* r = cfg.find("robot")) {
    if (r->has("torso_link")) m.torso_link = link_id(r->require_string("torso_link"));
    if (r->has("head_link")) m.head_link = link_id(r->require_string("head_link"));
    m.fixed_base = r->get_bool("fixed_base", false);
  }
  m.finalize();
  return m;
}

RobotModel load_robot_model_file(const std::string& path) {
  return load_robot_model(Config::parse_file(path));
}

}  // namespace footwork::dynamics
