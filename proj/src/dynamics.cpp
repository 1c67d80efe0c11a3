#include "footwork/dynamics.hpp"

#include <cmath>

#include "footwork/errors.hpp"

namespace footwork::dynamics {

namespace {

// planar cross products in the x-z plane, pitch positive counter-clockwise
inline double cross2(const Eigen::Vector2d& r, const Eigen::Vector2d& f) {
  return r.x() * f.y() - r.y() * f.x();
}
inline Eigen::Vector2d omega_cross(double w, const Eigen::Vector2d& r) {
  return {-w * r.y(), w * r.x()};
}
inline Eigen::Vector2d rotate(double ang, const Eigen::Vector2d& v) {
  const double c = std::cos(ang), s = std::sin(ang);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

struct BodyAccel {
  std::vector<double> wdot;
  std::vector<Eigen::Vector2d> a;
};

// Generalized force needed to produce the motion (q, u, udot). With
// gravity_lift > 0 the root is given an extra upward acceleration, which
// folds gravity loads into the result (world-accelerating-upward trick).
Eigen::VectorXd rnea(const RobotModel& m, const FrameKinematics& fk,
                     const Eigen::VectorXd& udot, double gravity_lift,
                     bool with_velocity_terms) {
  const int nl = m.num_links();
  const int base = m.fixed_base ? 0 : 3;
  BodyAccel acc;
  acc.wdot.assign(nl, 0.0);
  acc.a.assign(nl, Eigen::Vector2d::Zero());
  if (m.fixed_base) {
    acc.a[0] = {0.0, gravity_lift};
  } else {
    acc.wdot[0] = udot[2];
    acc.a[0] = {udot[0], udot[1] + gravity_lift};
  }
  for (int j = 0; j < m.num_joints(); ++j) {
    const auto& js = m.joints[j];
    const int p = js.parent, c = js.child;
    const Eigen::Vector2d r = rotate(fk.angle[p], js.anchor);
    acc.wdot[c] = acc.wdot[p] + udot[base + j];
    acc.a[c] = acc.a[p] + omega_cross(acc.wdot[p], r);
    if (with_velocity_terms) acc.a[c] -= fk.omega[p] * fk.omega[p] * r;
  }

  std::vector<Eigen::Vector2d> f(nl);
  std::vector<double> n(nl);
  for (int i = 0; i < nl; ++i) {
    const auto& l = m.links[i];
    const Eigen::Vector2d cw = rotate(fk.angle[i], l.axis * l.com_offset);
    Eigen::Vector2d acom = acc.a[i] + omega_cross(acc.wdot[i], cw);
    if (with_velocity_terms) acom -= fk.omega[i] * fk.omega[i] * cw;
    f[i] = l.mass * acom;
    n[i] = l.inertia * acc.wdot[i] + cross2(cw, f[i]);
  }

  Eigen::VectorXd tau = Eigen::VectorXd::Zero(m.dof());
  // children have larger indices, so one reverse sweep accumulates wrenches
  for (int j = m.num_joints() - 1; j >= 0; --j) {
    const auto& js = m.joints[j];
    const int p = js.parent, c = js.child;
    tau[base + j] = n[c];
    f[p] += f[c];
    n[p] += n[c] + cross2(fk.origin[c] - fk.origin[p], f[c]);
  }
  if (!m.fixed_base) {
    tau[0] = f[0].x();
    tau[1] = f[0].y();
    tau[2] = n[0];
  }
  return tau;
}

// Jacobian-transpose of a world force applied at point p on a link.
void apply_point_force(const RobotModel& m, const FrameKinematics& fk, int link,
                       const Eigen::Vector2d& p, const Eigen::Vector2d& force,
                       Eigen::VectorXd& gen) {
  const int base = m.fixed_base ? 0 : 3;
  if (!m.fixed_base) {
    gen[0] += force.x();
    gen[1] += force.y();
    gen[2] += cross2(p - fk.origin[0], force);
  }
  for (int j : m.joint_path[link])
    gen[base + j] += cross2(p - fk.origin[m.joints[j].child], force);
}

Eigen::MatrixXd mass_matrix(const RobotModel& m, const FrameKinematics& fk) {
  const int n = m.dof();
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    e[k] = 1.0;
    M.col(k) = rnea(m, fk, e, 0.0, false);
    e[k] = 0.0;
  }
  return M;
}

void clamp_joint_limits(const RobotModel& m, Eigen::VectorXd& q,
                        Eigen::VectorXd& qd) {
  for (int j = 0; j < m.num_joints(); ++j) {
    const auto& js = m.joints[j];
    if (q[j] > js.limit_hi) {
      q[j] = js.limit_hi;
      if (qd[j] > 0.0) qd[j] = 0.0;
    } else if (q[j] < js.limit_lo) {
      q[j] = js.limit_lo;
      if (qd[j] < 0.0) qd[j] = 0.0;
    }
  }
}

}  // namespace

bool WorldState::all_finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  return ok(base_x) && ok(base_z) && ok(base_pitch) && ok(base_vx) &&
         ok(base_vz) && ok(base_pitch_rate) && q.allFinite() && qd.allFinite() &&
         ok(ball_x) && ok(ball_z) && ok(ball_vx) && ok(ball_vz);
}

WorldState make_world(const RobotModel& model) {
  WorldState ws;
  ws.q = Eigen::VectorXd::Zero(model.num_joints());
  ws.qd = Eigen::VectorXd::Zero(model.num_joints());
  return ws;
}

double pd_torque(const MotorSpec& motor, double q, double qd, double target) {
  const double raw = motor.kp * (target - q) - motor.kd * qd;
  double limit = motor.stall_torque;
  if (raw * qd > 0.0)
    limit *= std::max(0.0, 1.0 - std::abs(qd) / motor.no_load_speed);
  return std::clamp(raw, -limit, limit);
}

Eigen::Vector2d contact_force(double penetration, double normal_vel,
                              double tangential_vel, const ContactParams& params) {
  if (penetration <= 0.0) return Eigen::Vector2d::Zero();
  const double fn =
      std::max(0.0, params.kn * penetration - params.dn * normal_vel);
  const double limit = params.mu * fn;
  const double ft =
      -std::clamp(params.tangential_damping * tangential_vel, -limit, limit);
  return {ft, fn};
}

FrameKinematics compute_fk(const RobotModel& model, const WorldState& ws) {
  const int nl = model.num_links();
  FrameKinematics fk;
  fk.angle.assign(nl, 0.0);
  fk.origin.assign(nl, Eigen::Vector2d::Zero());
  fk.origin_vel.assign(nl, Eigen::Vector2d::Zero());
  fk.omega.assign(nl, 0.0);
  fk.com.resize(nl);
  fk.com_vel.resize(nl);

  fk.angle[0] = ws.base_pitch;
  fk.origin[0] = {ws.base_x, ws.base_z};
  if (!model.fixed_base) {
    fk.origin_vel[0] = {ws.base_vx, ws.base_vz};
    fk.omega[0] = ws.base_pitch_rate;
  }
  for (int j = 0; j < model.num_joints(); ++j) {
    const auto& js = model.joints[j];
    const int p = js.parent, c = js.child;
    const Eigen::Vector2d r = rotate(fk.angle[p], js.anchor);
    fk.angle[c] = fk.angle[p] + js.mount_angle + ws.q[j];
    fk.origin[c] = fk.origin[p] + r;
    fk.omega[c] = fk.omega[p] + ws.qd[j];
    fk.origin_vel[c] = fk.origin_vel[p] + omega_cross(fk.omega[p], r);
  }
  for (int i = 0; i < nl; ++i) {
    const auto& l = model.links[i];
    const Eigen::Vector2d cw = rotate(fk.angle[i], l.axis * l.com_offset);
    fk.com[i] = fk.origin[i] + cw;
    fk.com_vel[i] = fk.origin_vel[i] + omega_cross(fk.omega[i], cw);
  }
  return fk;
}

Eigen::Vector2d FrameKinematics::total_com(const RobotModel& m) const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int i = 0; i < m.num_links(); ++i) c += m.links[i].mass * com[i];
  return c / m.total_mass();
}

Eigen::Vector2d FrameKinematics::total_com_vel(const RobotModel& m) const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int i = 0; i < m.num_links(); ++i) c += m.links[i].mass * com_vel[i];
  return c / m.total_mass();
}

std::vector<ContactPointState> foot_contact_states(const RobotModel& model,
                                                   const FrameKinematics& fk) {
  std::vector<ContactPointState> out;
  for (const auto& foot : model.feet) {
    for (const auto& pt : foot.points) {
      ContactPointState cs;
      const Eigen::Vector2d r = rotate(fk.angle[foot.link], pt);
      cs.pos = fk.origin[foot.link] + r;
      cs.vel = fk.origin_vel[foot.link] + omega_cross(fk.omega[foot.link], r);
      cs.link = foot.link;
      out.push_back(cs);
    }
  }
  return out;
}

double mechanical_energy(const RobotModel& model, const WorldState& ws,
                         double gravity) {
  const FrameKinematics fk = compute_fk(model, ws);
  double e = 0.0;
  for (int i = 0; i < model.num_links(); ++i) {
    const auto& l = model.links[i];
    e += 0.5 * l.mass * fk.com_vel[i].squaredNorm() +
         0.5 * l.inertia * fk.omega[i] * fk.omega[i] +
         l.mass * gravity * fk.com[i].y();
  }
  return e;
}

Eigen::VectorXd motor_torques(const RobotModel& model, const WorldState& ws,
                              const Eigen::VectorXd& targets) {
  Eigen::VectorXd tau(model.num_joints());
  for (int j = 0; j < model.num_joints(); ++j)
    tau[j] = pd_torque(model.joints[j].motor, ws.q[j], ws.qd[j], targets[j]);
  return tau;
}

namespace {

struct BallSegmentHit {
  bool hit = false;
  Eigen::Vector2d point;  // closest point on the sole segment
  Eigen::Vector2d normal; // from segment toward ball center
  int link = -1;
  double depth = 0.0;
};

BallSegmentHit ball_vs_foot(const RobotModel& m, const FrameKinematics& fk,
                            const Eigen::Vector2d& ball, double radius) {
  BallSegmentHit best;
  for (const auto& foot : m.feet) {
    if (foot.points.size() < 2) continue;
    const Eigen::Vector2d a =
        fk.origin[foot.link] + rotate(fk.angle[foot.link], foot.points.front());
    const Eigen::Vector2d b =
        fk.origin[foot.link] + rotate(fk.angle[foot.link], foot.points.back());
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? std::clamp((ball - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Eigen::Vector2d cp = a + t * ab;
    const Eigen::Vector2d d = ball - cp;
    const double dist = d.norm();
    if (dist < radius && radius - dist > best.depth) {
      best.hit = true;
      best.point = cp;
      best.normal = dist > 1e-9 ? Eigen::Vector2d(d / dist) : Eigen::Vector2d(0, 1);
      best.link = foot.link;
      best.depth = radius - dist;
    }
  }
  return best;
}

}  // namespace

WorldState step(const WorldState& world, const RobotModel& model,
                const Eigen::VectorXd& targets, const SimParams& params,
                double dt, StepEvents* events) {
  const bool actuated = targets.size() > 0;
  if (actuated && targets.size() != model.num_joints())
    throw ShapeMismatch("targets size != joint count");

  WorldState ws = world;
  const int base = model.fixed_base ? 0 : 3;
  const int n = model.dof();
  const double h = dt / params.substeps;
  StepEvents ev;

  for (int sub = 0; sub < params.substeps; ++sub) {
    FrameKinematics fk = compute_fk(model, ws);
    const Eigen::MatrixXd M = mass_matrix(model, fk);
    Eigen::LDLT<Eigen::MatrixXd> solver(M);

    // ball-foot impact: restitution impulse, reaction through the Jacobian
    if (ws.has_ball) {
      const BallSegmentHit hit =
          ball_vs_foot(model, fk, {ws.ball_x, ws.ball_z}, params.ball.radius);
      if (hit.hit) {
        const Eigen::Vector2d r = hit.point - fk.origin[hit.link];
        const Eigen::Vector2d vp =
            fk.origin_vel[hit.link] + omega_cross(fk.omega[hit.link], r);
        const Eigen::Vector2d vrel(ws.ball_vx - vp.x(), ws.ball_vz - vp.y());
        const double vn = vrel.dot(hit.normal);
        if (vn < 0.0) {
          // slow approaches stick instead of bouncing
          const double e = std::abs(vn) > 0.05 ? params.contact.restitution : 0.0;
          const Eigen::Vector2d dv = -(1.0 + e) * vn * hit.normal;
          ws.ball_vx += dv.x();
          ws.ball_vz += dv.y();
          const Eigen::Vector2d impulse = -params.ball.mass * dv;
          Eigen::VectorXd gen = Eigen::VectorXd::Zero(n);
          apply_point_force(model, fk, hit.link, hit.point, impulse, gen);
          const Eigen::VectorXd du = solver.solve(gen);
          if (!model.fixed_base) {
            ws.base_vx += du[0];
            ws.base_vz += du[1];
            ws.base_pitch_rate += du[2];
          }
          ws.qd += du.segment(base, model.num_joints());
          fk = compute_fk(model, ws);
          ev.ball_foot_contact = true;
          ev.ball_impulse += impulse.norm();
        }
        // project the ball out of the sole
        ws.ball_x += hit.normal.x() * hit.depth;
        ws.ball_z += hit.normal.y() * hit.depth;
      }
    }

    // generalized applied forces: motors + ground reactions
    Eigen::VectorXd gen = Eigen::VectorXd::Zero(n);
    if (actuated)
      for (int j = 0; j < model.num_joints(); ++j)
        gen[base + j] +=
            pd_torque(model.joints[j].motor, ws.q[j], ws.qd[j], targets[j]);

    for (const auto& cp : foot_contact_states(model, fk)) {
      if (cp.pos.y() >= 0.0) continue;
      const Eigen::Vector2d f =
          contact_force(-cp.pos.y(), cp.vel.y(), cp.vel.x(), params.contact);
      apply_point_force(model, fk, cp.link, cp.pos, f, gen);
    }

    Eigen::VectorXd u(n);
    if (!model.fixed_base) u.head<3>() << ws.base_vx, ws.base_vz, ws.base_pitch_rate;
    u.segment(base, model.num_joints()) = ws.qd;

    const Eigen::VectorXd bias =
        rnea(model, fk, Eigen::VectorXd::Zero(n), params.gravity, true);
    const Eigen::VectorXd udot = solver.solve(gen - bias);

    // second-order position update: exact for constant acceleration, which
    // keeps ballistic trajectories on the analytic parabola
    const Eigen::VectorXd u_new = u + h * udot;
    if (!model.fixed_base) {
      ws.base_x += h * u[0] + 0.5 * h * h * udot[0];
      ws.base_z += h * u[1] + 0.5 * h * h * udot[1];
      ws.base_pitch += h * u[2] + 0.5 * h * h * udot[2];
      ws.base_vx = u_new[0];
      ws.base_vz = u_new[1];
      ws.base_pitch_rate = u_new[2];
    }
    ws.q += h * u.segment(base, model.num_joints()) +
            0.5 * h * h * udot.segment(base, model.num_joints());
    ws.qd = u_new.segment(base, model.num_joints());
    clamp_joint_limits(model, ws.q, ws.qd);

    if (ws.has_ball) {
      double ax = 0.0, az = -params.gravity;
      const double pen = params.ball.radius - ws.ball_z;
      if (pen > 0.0) {
        const Eigen::Vector2d f =
            contact_force(pen, ws.ball_vz, 0.0, params.contact);
        az += f.y() / params.ball.mass;
        // no spin state: grounded balls shed speed via rolling resistance
        const double decel = params.ball.rolling_resistance * params.gravity;
        const double dv = std::min(decel * h, std::abs(ws.ball_vx));
        ax -= (ws.ball_vx > 0.0 ? dv : -dv) / h;
      }
      ws.ball_x += h * ws.ball_vx + 0.5 * h * h * ax;
      ws.ball_z += h * ws.ball_vz + 0.5 * h * h * az;
      ws.ball_vx += h * ax;
      ws.ball_vz += h * az;
    }
  }

  ws.step_count = world.step_count + 1;
  ws.time_s = ws.step_count * dt;
  if (!ws.all_finite())
    throw NumericalDivergence("simulation state went non-finite at step " +
                              std::to_string(ws.step_count));
  if (events) *events = ev;
  return ws;
}

}  // namespace footwork::dynamics
