#include "footwork/amp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "footwork/errors.hpp"

namespace footwork::rl {

MotionClip load_motion_clip(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open motion clip: " + path);
  MotionClip clip;
  std::string line;
  int line_no = 0;
  std::vector<Eigen::VectorXd> rows;
  bool have_dt = false, have_joints = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.find('=') != std::string::npos) {
      std::string key = line.substr(0, line.find('='));
      std::string val = line.substr(line.find('=') + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      key.erase(0, key.find_first_not_of(" \t"));
      val.erase(0, val.find_first_not_of(" \t"));
      if (key == "dt") {
        clip.dt = std::stod(val);
        have_dt = true;
      } else if (key == "joints") {
        std::stringstream ss(val);
        std::string name;
        while (std::getline(ss, name, ',')) {
          name.erase(0, name.find_first_not_of(" \t"));
          name.erase(name.find_last_not_of(" \t\r") + 1);
          clip.joint_names.push_back(name);
        }
        have_joints = true;
      } else {
        throw ParseError("unknown clip header '" + key + "'", line_no);
      }
      continue;
    }
    std::stringstream ss(line);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    const size_t expect = clip.joint_names.size() + 1;
    if (!have_joints || vals.size() != expect)
      throw ParseError("expected " + std::to_string(expect) +
                           " values per frame row",
                       line_no);
    rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  if (!have_dt) throw Error("motion clip missing dt header: " + path);
  if (rows.size() < 2)
    throw ValidationError("motion clip needs at least 2 frames: " + path);
  if (clip.dt <= 0.0) throw ValidationError("motion clip dt must be > 0");
  const int n = static_cast<int>(clip.joint_names.size());
  clip.frames.resize(n, rows.size());
  clip.base_height.resize(rows.size());
  for (size_t f = 0; f < rows.size(); ++f) {
    clip.frames.col(f) = rows[f].head(n);
    clip.base_height[f] = rows[f][n];
  }
  return clip;
}

void save_motion_clip(const std::string& path, const MotionClip& clip) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write motion clip: " + path);
  out.precision(10);
  out << "dt = " << clip.dt << "\n";
  out << "joints = ";
  for (size_t i = 0; i < clip.joint_names.size(); ++i)
    out << clip.joint_names[i] << (i + 1 < clip.joint_names.size() ? ", " : "\n");
  for (int f = 0; f < clip.num_frames(); ++f) {
    for (int j = 0; j < clip.frames.rows(); ++j) out << clip.frames(j, f) << " ";
    out << clip.base_height[f] << "\n";
  }
}

namespace {

// pelvis height over the sole for symmetric leg angles (hip, knee, ankle)
double stance_height(const dynamics::RobotModel& model, double hip, double knee) {
  const double lt = model.links[1].length;
  const double ls = model.links[2].length;
  const double ankle_over_sole = 0.03;
  return lt * std::cos(hip) + ls * std::cos(hip + knee) + ankle_over_sole;
}

}  // namespace

MotionClip generate_jump_clip(const dynamics::RobotModel& model, int cycles) {
  MotionClip clip;
  clip.dt = 1.0 / 30.0;
  for (const auto& j : model.joints) clip.joint_names.push_back(j.name);

  struct Key {
    double hip, knee, ankle, arm;
    int hold; // frames to reach this key from the previous one
  };
  // ready -> crouch -> explosive extension -> flight tuck -> landing crouch
  const std::vector<Key> keys = {
      {0.564, -1.176, 0.613, 1.5, 1},
      {1.10, -2.20, 1.10, 0.6, 7},  // crouch, arms swung back
      {0.05, -0.10, 0.05, 2.2, 3},  // full extension, arms thrown up
      {0.70, -1.40, 0.70, 1.8, 4},  // tuck at apex
      {1.00, -2.00, 1.00, 1.2, 4},  // landing absorb
      {0.564, -1.176, 0.613, 1.5, 5},
  };

  std::vector<Eigen::VectorXd> frames;
  std::vector<double> heights;
  const int n = model.num_joints();
  Eigen::VectorXd pose(n);
  auto emit = [&](const Key& k, double height) {
    pose.setZero();
    pose[0] = k.hip; pose[1] = k.knee; pose[2] = k.ankle;
    pose[3] = k.hip; pose[4] = k.knee; pose[5] = k.ankle;
    pose[6] = k.arm; pose[7] = k.arm;
    frames.push_back(pose);
    heights.push_back(height);
  };

  for (int c = 0; c < cycles; ++c) {
    for (size_t k = (c == 0 ? 0u : 1u); k < keys.size(); ++k) {
      const Key& prev = keys[k == 0 ? 0 : k - 1];
      const Key& cur = keys[k];
      for (int s = (k == 0 ? 0 : 1); s <= cur.hold; ++s) {
        const double a = cur.hold > 0 ? static_cast<double>(s) / cur.hold : 1.0;
        Key mix{prev.hip + a * (cur.hip - prev.hip),
                prev.knee + a * (cur.knee - prev.knee),
                prev.ankle + a * (cur.ankle - prev.ankle),
                prev.arm + a * (cur.arm - prev.arm), 0};
        double h = stance_height(model, mix.hip, mix.knee);
        // the tuck segment is airborne: ballistic arc over the lift-off
        // height, returning to it at touch-down
        if (k == 3) {
          const double span = keys[3].hold * clip.dt;
          const double t = a * span;
          const double h0 = stance_height(model, keys[2].hip, keys[2].knee);
          h = h0 + 0.5 * 9.81 * span * t - 0.5 * 9.81 * t * t;
        }
        emit(mix, h);
      }
    }
  }

  clip.frames.resize(n, frames.size());
  clip.base_height.resize(frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    clip.frames.col(f) = frames[f];
    clip.base_height[f] = heights[f];
  }
  return clip;
}

int amp_feature_dim(const dynamics::RobotModel& model) {
  return 2 * model.num_joints() + 4;
}

Eigen::VectorXd amp_features(const dynamics::WorldState& prev,
                             const dynamics::WorldState& cur,
                             const dynamics::RobotModel& model) {
  (void)prev;
  const int n = model.num_joints();
  Eigen::VectorXd f(2 * n + 4);
  f.head(n) = cur.q;
  f.segment(n, n) = cur.qd;
  const auto fk = dynamics::compute_fk(model, cur);
  f[2 * n] = fk.com[model.torso_link].y();
  f[2 * n + 1] = cur.base_vx;
  f[2 * n + 2] = cur.base_vz;
  f[2 * n + 3] = cur.base_pitch;
  return f;
}

Eigen::MatrixXd clip_transition_features(const MotionClip& clip) {
  const int n = static_cast<int>(clip.frames.rows());
  const int t = clip.num_frames() - 1;
  Eigen::MatrixXd out(2 * n + 4, t);
  for (int k = 0; k < t; ++k) {
    out.col(k).head(n) = clip.frames.col(k + 1);
    out.col(k).segment(n, n) =
        (clip.frames.col(k + 1) - clip.frames.col(k)) / clip.dt;
    out(2 * n, k) = clip.base_height[k + 1];
    out(2 * n + 1, k) = 0.0; // clip space is torso-anchored: no x drift
    out(2 * n + 2, k) = (clip.base_height[k + 1] - clip.base_height[k]) / clip.dt;
    out(2 * n + 3, k) = 0.0; // upright reference
  }
  return out;
}

DiscriminatorStats discriminator_step(net::Mlp& disc, net::Adam& opt,
                                      const Eigen::MatrixXd& real_batch,
                                      const Eigen::MatrixXd& fake_batch,
                                      const AmpConfig& config) {
  if (real_batch.cols() == 0 || fake_batch.cols() == 0)
    throw LengthMismatch("discriminator_step: empty batch");
  DiscriminatorStats stats;
  net::MlpGrads grads;
  grads.setZero(disc);

  net::ForwardCache real_cache, fake_cache;
  const Eigen::MatrixXd d_real = mlp_forward(disc, real_batch, &real_cache);
  const Eigen::MatrixXd d_fake = mlp_forward(disc, fake_batch, &fake_cache);
  const double nr = static_cast<double>(d_real.cols());
  const double nf = static_cast<double>(d_fake.cols());

  // least squares: mean((d_real - 1)^2) + mean((d_fake + 1)^2)
  const Eigen::MatrixXd er = d_real.array() - 1.0;
  const Eigen::MatrixXd ef = d_fake.array() + 1.0;
  stats.loss = er.array().square().mean() + ef.array().square().mean();
  mlp_backward(disc, real_cache, Eigen::MatrixXd(2.0 * er / nr), grads);
  mlp_backward(disc, fake_cache, Eigen::MatrixXd(2.0 * ef / nf), grads);

  if (config.gradient_penalty != 0.0) {
    stats.gradient_penalty =
        gradient_penalty_backward(disc, real_cache, config.gradient_penalty, grads);
    stats.loss += stats.gradient_penalty;
  }

  stats.real_accuracy = (d_real.array() > 0.0).cast<double>().mean();
  stats.fake_accuracy = (d_fake.array() < 0.0).cast<double>().mean();
  opt.step(disc, grads);
  return stats;
}

double style_reward(double disc_output) {
  const double v = 1.0 - 0.25 * (disc_output - 1.0) * (disc_output - 1.0);
  return std::max(0.0, v);
}

}  // namespace footwork::rl
