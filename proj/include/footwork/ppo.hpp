#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <deque>
#include <iosfwd>
#include <numeric>
#include <sstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "footwork/adam.hpp"
#include "footwork/amp.hpp"
#include "footwork/binio.hpp"
#include "footwork/environment.hpp"
#include "footwork/gae.hpp"
#include "footwork/mlp.hpp"
#include "footwork/rng.hpp"

namespace footwork::rl {

struct PpoConfig {
  double gamma = 0.95;
  double gae_lambda = 0.99;
  double clip = 0.2;
  double learning_rate = 3e-4;
  int minibatch_size = 4096;
  int mini_epochs = 5;
  double vf_coef = 0.001;
  double ent_coef = 0.0;
  int num_envs = 256;
  int horizon = 64;
  std::vector<int> hidden{400, 200, 100};
  bool normalize_advantages = true;
  double kl_stop = 0.03;
  bool parallel = true;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma out of (0,1]");
    if (gae_lambda < 0.0 || gae_lambda > 1.0)
      throw ValidationError("gae_lambda out of [0,1]");
    if (!(clip > 0.0)) throw ValidationError("clip must be > 0");
    if (minibatch_size > num_envs * horizon)
      throw ValidationError("minibatch_size exceeds num_envs*horizon");
    if (num_envs < 1 || horizon < 1)
      throw ValidationError("num_envs and horizon must be >= 1");
  }
};

/// Transition storage over (env, time); column e*horizon + t.
struct RolloutBuffer {
  int num_envs = 0, horizon = 0;
  Eigen::MatrixXd obs;      // (obs_dim x E*H)
  Eigen::MatrixXd actions;  // raw pre-scale actions (act_dim x E*H)
  Eigen::VectorXd log_prob_old, value_old, reward, done;
  Eigen::VectorXd bootstrap; // (E)
  Eigen::VectorXd advantages, returns;

  void resize(int envs, int steps, int obs_dim, int act_dim) {
    num_envs = envs;
    horizon = steps;
    const int n = envs * steps;
    obs.resize(obs_dim, n);
    actions.resize(act_dim, n);
    log_prob_old.resize(n);
    value_old.resize(n);
    reward.resize(n);
    done.resize(n);
    bootstrap.resize(envs);
    advantages.resize(n);
    returns.resize(n);
  }
  int index(int e, int t) const { return e * horizon + t; }
  int size() const { return num_envs * horizon; }
};

struct TrainStats {
  long iteration = 0;
  double mean_return = 0.0;
  int episodes = 0;
  double actor_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;
  double style_reward_mean = 0.0;
  double disc_loss = 0.0;
  double disc_real_acc = 0.0;
  double disc_fake_acc = 0.0;
  double wall_ms = 0.0; // timing only; excluded from the metrics log
};

template <class EnvT>
concept AmpCapable = requires(const EnvT& e) {
  { e.last_amp_features() } -> std::convertible_to<Eigen::VectorXd>;
};

/// PPO with GAE over a vector of independent environments. Rollout
/// collection and gradient accumulation run either serially or under
/// OpenMP; both paths shard identically and reduce in a fixed order, so
/// results are bitwise equal for any worker count.
template <class EnvT>
class Trainer {
 public:
  Trainer(std::vector<EnvT> envs, const PpoConfig& cfg, const AmpConfig& amp,
          std::uint64_t seed)
      : cfg_(cfg), amp_cfg_(amp), envs_(std::move(envs)), master_rng_(seed) {
    cfg_.validate();
    if (static_cast<int>(envs_.size()) != cfg_.num_envs)
      throw ValidationError("env count does not match config num_envs");
    const int obs_dim = envs_.front().observation_size();
    const int act_dim = envs_.front().action_size();
    actor_ = net::mlp_init(obs_dim, cfg_.hidden, act_dim, master_rng_, true);
    critic_ = net::mlp_init(obs_dim, cfg_.hidden, 1, master_rng_);
    opt_actor_ = net::Adam(actor_, cfg_.learning_rate);
    opt_critic_ = net::Adam(critic_, cfg_.learning_rate);
    shuffle_rng_ = master_rng_.spawn();
    for (int e = 0; e < cfg_.num_envs; ++e) env_rngs_.push_back(master_rng_.spawn());
    if (amp_cfg_.enabled) init_amp();
    buffer_.resize(cfg_.num_envs, cfg_.horizon, obs_dim, act_dim);
    if (amp_cfg_.enabled)
      fake_scratch_.assign(cfg_.num_envs,
                           Eigen::MatrixXd(disc_.input_dim(), cfg_.horizon));
    cur_obs_.resize(cfg_.num_envs);
    ep_return_.assign(cfg_.num_envs, 0.0);
    for (int e = 0; e < cfg_.num_envs; ++e) cur_obs_[e] = envs_[e].reset();
  }

  TrainStats train_iteration() {
    TrainStats stats;
    stats.iteration = ++iteration_;
    const auto t0 = now_ms();

    collect_rollout(stats);
    compute_advantages();
    update_policy(stats);
    if (amp_cfg_.enabled) update_discriminator(stats);

    if (!std::isfinite(stats.actor_loss) || !std::isfinite(stats.value_loss))
      throw NumericalDivergence("losses went non-finite at iteration " +
                                std::to_string(iteration_));
    stats.entropy = net::gaussian_entropy(net::clamped_log_std(actor_));
    stats.mean_return = last_mean_return_;
    stats.wall_ms = now_ms() - t0;
    return stats;
  }

  /// Deterministic (mean-action) episode return on a throwaway env copy.
  double evaluate_return(EnvT env, int max_steps) const {
    Eigen::VectorXd obs = env.reset();
    double total = 0.0;
    for (int t = 0; t < max_steps; ++t) {
      const Eigen::VectorXd mean = mlp_forward(actor_, obs);
      const auto r = env.step_raw(mean);
      total += r.reward;
      if (r.done) break;
      obs = r.observation;
    }
    return total;
  }

  const net::Mlp& actor() const { return actor_; }
  const net::Mlp& critic() const { return critic_; }
  const net::Mlp& discriminator() const { return disc_; }
  net::Mlp& mutable_actor() { return actor_; }
  const RolloutBuffer& buffer() const { return buffer_; }
  long iteration() const { return iteration_; }
  std::vector<EnvT>& environments() { return envs_; }

  void set_progress(double p) {
    for (auto& e : envs_) e.set_progress(std::clamp(p, 0.0, 1.0));
  }
  void set_parallel(bool on) { cfg_.parallel = on; }

  void save_networks(std::ostream& os) const {
    net::save_mlp(os, actor_);
    net::save_mlp(os, critic_);
  }
  void load_networks(std::istream& is) {
    actor_ = net::load_mlp(is);
    critic_ = net::load_mlp(is);
  }

  bool has_discriminator() const { return amp_cfg_.enabled; }
  void save_discriminator(std::ostream& os) const { net::save_mlp(os, disc_); }
  void load_discriminator(std::istream& is) { disc_ = net::load_mlp(is); }

  void save_optimizers(std::ostream& os) const {
    opt_actor_.save(os);
    opt_critic_.save(os);
    if (amp_cfg_.enabled) opt_disc_.save(os);
  }
  void load_optimizers(std::istream& is) {
    opt_actor_.load(is);
    opt_critic_.load(is);
    if (amp_cfg_.enabled) opt_disc_.load(is);
  }

  void save_rng_state(std::ostream& os) const {
    std::ostringstream rs;
    master_rng_.save(rs);
    rs << ' ';
    shuffle_rng_.save(rs);
    binio::put_string(os, rs.str());
    binio::put_u64(os, env_rngs_.size());
    for (const auto& r : env_rngs_) {
      std::ostringstream es;
      r.save(es);
      binio::put_string(os, es.str());
    }
  }
  void load_rng_state(std::istream& is) {
    std::istringstream rs(binio::get_string(is));
    master_rng_.load(rs);
    shuffle_rng_.load(rs);
    const auto n_rng = binio::get_u64(is);
    if (n_rng != env_rngs_.size()) throw CorruptFile("trainer rng count mismatch");
    for (auto& r : env_rngs_) {
      std::istringstream es(binio::get_string(is));
      r.load(es);
    }
  }

  void save_env_state(std::ostream& os) const {
    binio::put_i64(os, iteration_);
    binio::put_f64(os, last_mean_return_);
    binio::put_u64(os, envs_.size());
    for (int e = 0; e < static_cast<int>(envs_.size()); ++e) {
      envs_[e].save(os);
      binio::put_vec(os, cur_obs_[e]);
      binio::put_f64(os, ep_return_[e]);
    }
    binio::put_u64(os, amp_cfg_.enabled ? 1 : 0);
    if (amp_cfg_.enabled) {
      binio::put_u64(os, replay_.size());
      for (const auto& f : replay_) binio::put_vec(os, f);
    }
  }
  void load_env_state(std::istream& is) {
    iteration_ = binio::get_i64(is);
    last_mean_return_ = binio::get_f64(is);
    const auto n_env = binio::get_u64(is);
    if (n_env != envs_.size()) throw CorruptFile("trainer env count mismatch");
    for (int e = 0; e < static_cast<int>(envs_.size()); ++e) {
      envs_[e].load(is);
      cur_obs_[e] = binio::get_vec(is);
      ep_return_[e] = binio::get_f64(is);
    }
    const bool amp_saved = binio::get_u64(is) != 0;
    if (amp_saved != amp_cfg_.enabled)
      throw CorruptFile("checkpoint AMP state does not match config");
    if (amp_cfg_.enabled) {
      replay_.clear();
      const auto n = binio::get_u64(is);
      for (std::uint64_t i = 0; i < n; ++i) replay_.push_back(binio::get_vec(is));
    }
  }

  /// Real-motion features loaded from clips (AMP training data).
  void set_reference_features(Eigen::MatrixXd features) {
    reference_features_ = std::move(features);
  }

 private:
  static double now_ms() {
    return static_cast<double>(
               std::chrono::duration_cast<std::chrono::microseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
                   .count()) /
           1000.0;
  }

  void init_amp() {
    if constexpr (AmpCapable<EnvT>) {
      Eigen::VectorXd probe = envs_.front().last_amp_features();
      disc_ = net::mlp_init(static_cast<int>(probe.size()), amp_cfg_.disc_hidden,
                            1, master_rng_);
      opt_disc_ = net::Adam(disc_, amp_cfg_.disc_lr);
    } else {
      throw ValidationError("AMP enabled but environment has no feature hook");
    }
  }

  void collect_rollout(TrainStats& stats) {
    const int E = cfg_.num_envs, H = cfg_.horizon;
    std::vector<std::vector<double>> finished(E);
    std::vector<double> style_sum(E, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (cfg_.parallel)
#endif
    for (int e = 0; e < E; ++e) {
      Eigen::VectorXd obs = cur_obs_[e];
      for (int t = 0; t < H; ++t) {
        const int k = buffer_.index(e, t);
        net::PolicyOutput po;
        po.mean = mlp_forward(actor_, obs);
        po.log_std = net::clamped_log_std(actor_);
        const net::GaussianSample gs = net::gaussian_logprob_sample(po, env_rngs_[e]);
        const double value = mlp_forward(critic_, obs)[0];

        buffer_.obs.col(k) = obs;
        buffer_.actions.col(k) = gs.action;
        buffer_.log_prob_old[k] = gs.log_prob;
        buffer_.value_old[k] = value;

        const auto r = envs_[e].step_raw(gs.action);
        double reward = r.reward;
        if constexpr (AmpCapable<EnvT>) {
          if (amp_cfg_.enabled) {
            const Eigen::VectorXd feat = envs_[e].last_amp_features();
            const double d = mlp_forward(disc_, feat)[0];
            const double rs = style_reward(d);
            reward = amp_cfg_.w_task * r.reward + amp_cfg_.w_style * rs;
            style_sum[e] += rs;
            fake_scratch_[e].col(t) = feat;
          }
        }
        buffer_.reward[k] = reward;
        buffer_.done[k] = r.done ? 1.0 : 0.0;
        ep_return_[e] += reward;
        if (r.done) {
          finished[e].push_back(ep_return_[e]);
          ep_return_[e] = 0.0;
          obs = envs_[e].reset();
        } else {
          obs = r.observation;
        }
      }
      buffer_.bootstrap[e] = mlp_forward(critic_, obs)[0];
      cur_obs_[e] = obs;
    }

    double sum = 0.0;
    int count = 0;
    for (const auto& f : finished) {
      for (double v : f) {
        sum += v;
        ++count;
      }
    }
    stats.episodes = count;
    if (count > 0) last_mean_return_ = sum / count;
    if (amp_cfg_.enabled) {
      stats.style_reward_mean =
          std::accumulate(style_sum.begin(), style_sum.end(), 0.0) / (E * H);
      for (int e = 0; e < E; ++e)
        for (int t = 0; t < H; ++t) push_replay(fake_scratch_[e].col(t));
    }
  }

  void push_replay(const Eigen::VectorXd& f) {
    replay_.push_back(f);
    while (static_cast<int>(replay_.size()) > amp_cfg_.replay_size)
      replay_.pop_front();
  }

  void compute_advantages() {
    const int E = cfg_.num_envs, H = cfg_.horizon;
    for (int e = 0; e < E; ++e) {
      const int base = buffer_.index(e, 0);
      const GaeResult g = compute_gae(
          buffer_.reward.segment(base, H), buffer_.value_old.segment(base, H),
          buffer_.done.segment(base, H), buffer_.bootstrap[e], cfg_.gamma,
          cfg_.gae_lambda);
      buffer_.advantages.segment(base, H) = g.advantages;
      buffer_.returns.segment(base, H) = g.returns;
    }
    if (cfg_.normalize_advantages) {
      const double mean = buffer_.advantages.mean();
      const double sd = std::sqrt(
          (buffer_.advantages.array() - mean).square().sum() /
          std::max(1, buffer_.size() - 1));
      buffer_.advantages = (buffer_.advantages.array() - mean) / (sd + 1e-8);
    }
  }

  struct ShardResult {
    net::MlpGrads actor_g, critic_g;
    double surr = 0.0, vloss = 0.0, kl = 0.0;
    long clipped = 0;
  };

  static constexpr int kShard = 1024;

  void update_policy(TrainStats& stats) {
    const int batch = buffer_.size();
    const int mb_size = std::min(cfg_.minibatch_size, batch);
    std::vector<int> order(batch);
    std::iota(order.begin(), order.end(), 0);

    double kl_last = 0.0, clip_frac = 0.0, actor_loss = 0.0, value_loss = 0.0;
    long minibatches = 0;
    bool stop = false;

    for (int epoch = 0; epoch < cfg_.mini_epochs && !stop; ++epoch) {
      // Fisher-Yates with the trainer stream
      for (int i = batch - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng_.uniform_int(i + 1)]);

      for (int start = 0; start + mb_size <= batch && !stop; start += mb_size) {
        const Eigen::VectorXd log_std = net::clamped_log_std(actor_);
        const int shards = (mb_size + kShard - 1) / kShard;
        std::vector<ShardResult> results(shards);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (cfg_.parallel)
#endif
        for (int s = 0; s < shards; ++s)
          results[s] = process_shard(order, start + s * kShard,
                                     std::min(kShard, mb_size - s * kShard),
                                     mb_size, log_std);

        net::MlpGrads actor_g, critic_g;
        actor_g.setZero(actor_);
        critic_g.setZero(critic_);
        double kl = 0.0;
        long clipped = 0;
        double surr = 0.0, vloss = 0.0;
        for (const auto& r : results) { // fixed reduction order
          actor_g.add(r.actor_g);
          critic_g.add(r.critic_g);
          kl += r.kl;
          clipped += r.clipped;
          surr += r.surr;
          vloss += r.vloss;
        }
        // entropy bonus acts on the (state-independent) log-std only
        if (cfg_.ent_coef != 0.0)
          actor_g.log_std.array() -= cfg_.ent_coef;

        opt_actor_.step(actor_, actor_g);
        actor_.log_std =
            actor_.log_std.cwiseMax(net::kLogStdMin).cwiseMin(net::kLogStdMax);
        opt_critic_.step(critic_, critic_g);

        ++minibatches;
        kl_last = kl / mb_size;
        clip_frac += static_cast<double>(clipped) / mb_size;
        actor_loss += -surr / mb_size;
        value_loss += vloss / mb_size;
        if (kl_last > cfg_.kl_stop) stop = true;
      }
    }
    stats.kl = kl_last;
    stats.clip_fraction = minibatches ? clip_frac / minibatches : 0.0;
    stats.actor_loss = minibatches ? actor_loss / minibatches : 0.0;
    stats.value_loss = minibatches ? value_loss / minibatches : 0.0;
  }

  ShardResult process_shard(const std::vector<int>& order, int begin, int count,
                            int mb_size, const Eigen::VectorXd& log_std) {
    ShardResult out;
    out.actor_g.setZero(actor_);
    out.critic_g.setZero(critic_);
    if (count <= 0) return out;

    const int obs_dim = static_cast<int>(buffer_.obs.rows());
    const int act_dim = static_cast<int>(buffer_.actions.rows());
    Eigen::MatrixXd X(obs_dim, count), A(act_dim, count);
    Eigen::VectorXd adv(count), ret(count), lp_old(count);
    for (int i = 0; i < count; ++i) {
      const int k = order[begin + i];
      X.col(i) = buffer_.obs.col(k);
      A.col(i) = buffer_.actions.col(k);
      adv[i] = buffer_.advantages[k];
      ret[i] = buffer_.returns[k];
      lp_old[i] = buffer_.log_prob_old[k];
    }

    net::ForwardCache actor_cache, critic_cache;
    const Eigen::MatrixXd mean = mlp_forward(actor_, X, &actor_cache);
    const Eigen::MatrixXd value = mlp_forward(critic_, X, &critic_cache);

    const Eigen::VectorXd sigma = log_std.array().exp();
    const Eigen::VectorXd inv_var = (-2.0 * log_std.array()).exp();
    Eigen::MatrixXd g_mean(act_dim, count);
    Eigen::MatrixXd g_value(1, count);
    const double inv_mb = 1.0 / mb_size;

    for (int i = 0; i < count; ++i) {
      double lp_new = 0.0;
      for (int d = 0; d < act_dim; ++d) {
        const double z = (A(d, i) - mean(d, i)) / sigma[d];
        lp_new += -0.5 * z * z - log_std[d] - 0.5 * std::log(2.0 * M_PI);
      }
      const double ratio = std::exp(lp_new - lp_old[i]);
      const double a = adv[i];
      const bool unclipped_active =
          a >= 0.0 ? ratio <= 1.0 + cfg_.clip : ratio >= 1.0 - cfg_.clip;
      const double clipped_ratio = std::clamp(ratio, 1.0 - cfg_.clip, 1.0 + cfg_.clip);
      out.surr += std::min(ratio * a, clipped_ratio * a);
      if (std::abs(ratio - 1.0) > cfg_.clip) ++out.clipped;
      out.kl += lp_old[i] - lp_new;

      // d(-surrogate)/d lp_new, averaged over the minibatch
      const double coef = unclipped_active ? -a * ratio * inv_mb : 0.0;
      for (int d = 0; d < act_dim; ++d) {
        const double diff = A(d, i) - mean(d, i);
        // dlp/dmean = (a-mu)/sigma^2; chain through the surrogate
        g_mean(d, i) = coef * diff * inv_var[d];
        const double z2 = diff * diff * inv_var[d];
        out.actor_g.log_std[d] += coef * (z2 - 1.0);
      }

      const double verr = value(0, i) - ret[i];
      out.vloss += 0.5 * verr * verr;
      g_value(0, i) = cfg_.vf_coef * verr * inv_mb;
    }
    mlp_backward(actor_, actor_cache, g_mean, out.actor_g);
    mlp_backward(critic_, critic_cache, g_value, out.critic_g);
    return out;
  }

  void update_discriminator(TrainStats& stats) {
    if (reference_features_.cols() == 0 || replay_.empty()) return;
    for (int s = 0; s < amp_cfg_.disc_steps; ++s) {
      const int mb = amp_cfg_.disc_minibatch;
      Eigen::MatrixXd real(reference_features_.rows(), mb);
      Eigen::MatrixXd fake(reference_features_.rows(), mb);
      for (int i = 0; i < mb; ++i) {
        real.col(i) = reference_features_.col(
            shuffle_rng_.uniform_int(reference_features_.cols()));
        fake.col(i) = replay_[shuffle_rng_.uniform_int(replay_.size())];
      }
      const auto ds = discriminator_step(disc_, opt_disc_, real, fake, amp_cfg_);
      stats.disc_loss = ds.loss;
      stats.disc_real_acc = ds.real_accuracy;
      stats.disc_fake_acc = ds.fake_accuracy;
    }
  }

  PpoConfig cfg_;
  AmpConfig amp_cfg_;
  std::vector<EnvT> envs_;
  Rng master_rng_, shuffle_rng_;
  std::vector<Rng> env_rngs_;
  net::Mlp actor_, critic_, disc_;
  net::Adam opt_actor_, opt_critic_, opt_disc_;
  RolloutBuffer buffer_;
  std::vector<Eigen::VectorXd> cur_obs_;
  std::vector<double> ep_return_;
  std::deque<Eigen::VectorXd> replay_;
  Eigen::MatrixXd reference_features_;
  std::vector<Eigen::MatrixXd> fake_scratch_;
  long iteration_ = 0;
  double last_mean_return_ = 0.0;
};

}  // namespace footwork::rl
