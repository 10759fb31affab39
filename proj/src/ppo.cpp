#include "airpid/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "airpid/csv.hpp"
#include "airpid/eval.hpp"

namespace airpid::ppo {

namespace {
constexpr int kGradBlock = 16;  // fixed blocking keeps the reduction order
                                // independent of the thread count
}  // namespace

void RolloutBuffer::push(const std::array<double, nn::kObsDim>& o,
                         const std::array<double, nn::kActionDim>& a,
                         double lp, double r, double v, bool d, bool trunc,
                         double boot) {
  obs.push_back(o);
  raw_action.push_back(a);
  old_log_prob.push_back(lp);
  reward.push_back(r);
  value.push_back(v);
  done.push_back(d ? 1 : 0);
  truncated.push_back(trunc ? 1 : 0);
  boot_value.push_back(boot);
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda,
                 double last_value) {
  const int n = static_cast<int>(buffer.size());
  buffer.advantage.assign(n, 0.0);
  buffer.value_target.assign(n, 0.0);
  double gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double v_next;
    if (buffer.done[t]) {
      v_next = buffer.truncated[t] ? buffer.boot_value[t] : 0.0;
      gae = 0.0;  // episode boundary cuts the recurrence
    } else {
      v_next = (t + 1 < n) ? buffer.value[t + 1] : last_value;
    }
    const double delta =
        buffer.reward[t] + gamma * v_next - buffer.value[t];
    gae = delta + gamma * lambda * (buffer.done[t] ? 0.0 : gae);
    buffer.advantage[t] = gae;
    buffer.value_target[t] = gae + buffer.value[t];
  }
}

void normalize_advantages(RolloutBuffer& buffer) {
  const int n = static_cast<int>(buffer.size());
  if (n == 0) return;
  double mean = 0.0;
  for (double a : buffer.advantage) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : buffer.advantage) var += (a - mean) * (a - mean);
  var /= n;
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : buffer.advantage) a = (a - mean) * inv;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped =
      std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage;
  return std::min(ratio * advantage, clipped);
}

double value_loss(const std::vector<double>& v_pred,
                  const std::vector<double>& v_target) {
  if (v_pred.size() != v_target.size() || v_pred.empty()) {
    throw std::invalid_argument("value_loss: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v_pred.size(); ++i) {
    const double d = v_pred[i] - v_target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(v_pred.size());
}

double combined_objective(double surrogate, double vloss, double entropy,
                          double c1, double c2) {
  return surrogate - c1 * vloss + c2 * entropy;
}

namespace {

struct BlockStats {
  double surr = 0.0;
  double vloss = 0.0;
  double ent = 0.0;
  int clipped = 0;
};

// Loss terms and (optionally) gradient contributions for batch[begin, end).
// Gradients accumulate the d(minimized loss)/dparams of those samples,
// already divided by the full batch size.
BlockStats loss_block(const nn::NetworkParams& params,
                      const std::vector<Sample>& batch, int begin, int end,
                      const PpoHyperparams& hp, std::vector<double>* grad) {
  BlockStats s;
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  nn::ForwardTrace trace;
  for (int i = begin; i < end; ++i) {
    const Sample& smp = batch[i];
    const auto fwd = nn::forward(params, smp.obs, grad ? &trace : nullptr);

    const double new_lp = nn::log_prob(smp.raw_action, fwd.mean, fwd.log_std);
    const double ratio = std::exp(new_lp - smp.old_log_prob);
    const double unclipped = ratio * smp.advantage;
    const double clipped =
        std::clamp(ratio, 1.0 - hp.clip_epsilon, 1.0 + hp.clip_epsilon) *
        smp.advantage;
    s.surr += std::min(unclipped, clipped);
    if (ratio < 1.0 - hp.clip_epsilon || ratio > 1.0 + hp.clip_epsilon) {
      s.clipped += 1;
    }
    const double vdiff = fwd.value - smp.value_target;
    s.vloss += vdiff * vdiff;
    s.ent += nn::entropy(fwd.log_std);

    if (grad) {
      // d(min) w.r.t. new_lp: ratio*adv on the active unclipped branch,
      // zero once the clip is binding.
      const bool inside = ratio > 1.0 - hp.clip_epsilon &&
                          ratio < 1.0 + hp.clip_epsilon;
      const double d_surr_d_lp =
          (unclipped <= clipped || inside) ? unclipped : 0.0;
      const double d_lp = -inv_m * d_surr_d_lp;  // surrogate is maximized

      nn::HeadGrads up;
      for (int a = 0; a < nn::kActionDim; ++a) {
        const double sigma = std::exp(fwd.log_std[a]);
        const double z = (smp.raw_action[a] - fwd.mean[a]) / sigma;
        up.d_mean[a] = d_lp * z / sigma;
        up.d_log_std[a] = d_lp * (z * z - 1.0) - inv_m * hp.c2;
      }
      up.d_value = inv_m * hp.c1 * 2.0 * vdiff;
      nn::backward(params, trace, up, *grad);
    }
  }
  return s;
}

LossStats finish_stats(const BlockStats& total, std::size_t m,
                       const PpoHyperparams& hp) {
  LossStats out;
  const double inv_m = 1.0 / static_cast<double>(m);
  out.surrogate = total.surr * inv_m;
  out.value_loss = total.vloss * inv_m;
  out.entropy = total.ent * inv_m;
  out.clip_fraction = static_cast<double>(total.clipped) * inv_m;
  out.loss = -combined_objective(out.surrogate, out.value_loss, out.entropy,
                                 hp.c1, hp.c2);
  return out;
}

}  // namespace

LossStats ppo_loss(const nn::NetworkParams& params,
                   const std::vector<Sample>& batch,
                   const PpoHyperparams& hp) {
  const BlockStats s =
      loss_block(params, batch, 0, static_cast<int>(batch.size()), hp, nullptr);
  return finish_stats(s, batch.size(), hp);
}

LossStats ppo_loss_grad_serial(const nn::NetworkParams& params,
                               const std::vector<Sample>& batch,
                               const PpoHyperparams& hp,
                               std::vector<double>& grad) {
  grad.assign(nn::ParamLayout::total, 0.0);
  const BlockStats s =
      loss_block(params, batch, 0, static_cast<int>(batch.size()), hp, &grad);
  return finish_stats(s, batch.size(), hp);
}

LossStats ppo_loss_grad(const nn::NetworkParams& params,
                        const std::vector<Sample>& batch,
                        const PpoHyperparams& hp, std::vector<double>& grad) {
  const int n = static_cast<int>(batch.size());
  const int blocks = (n + kGradBlock - 1) / kGradBlock;
  std::vector<std::vector<double>> block_grads(
      blocks, std::vector<double>(nn::ParamLayout::total, 0.0));
  std::vector<BlockStats> block_stats(blocks);

#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int begin = b * kGradBlock;
    const int end = std::min(n, begin + kGradBlock);
    block_stats[b] =
        loss_block(params, batch, begin, end, hp, &block_grads[b]);
  }

  grad.assign(nn::ParamLayout::total, 0.0);
  BlockStats total;
  for (int b = 0; b < blocks; ++b) {
    total.surr += block_stats[b].surr;
    total.vloss += block_stats[b].vloss;
    total.ent += block_stats[b].ent;
    total.clipped += block_stats[b].clipped;
    for (int i = 0; i < nn::ParamLayout::total; ++i) {
      grad[i] += block_grads[b][i];
    }
  }
  return finish_stats(total, batch.size(), hp);
}

namespace {

double median_or_nan(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return metrics::median(std::move(v));
}

void dump_minibatch(const std::string& path, const std::vector<Sample>& batch,
                    const LossStats& stats) {
  io::CsvWriter w(path, "airpid.minibatch-dump.v1",
                  {"obs0", "obs1", "obs2", "raw0", "raw1", "raw2",
                   "old_log_prob", "advantage", "value_target"});
  for (const auto& s : batch) {
    w.row({io::fmt_double(s.obs[0]), io::fmt_double(s.obs[1]),
           io::fmt_double(s.obs[2]), io::fmt_double(s.raw_action[0]),
           io::fmt_double(s.raw_action[1]), io::fmt_double(s.raw_action[2]),
           io::fmt_double(s.old_log_prob), io::fmt_double(s.advantage),
           io::fmt_double(s.value_target)});
  }
  (void)stats;
}

}  // namespace

TrainResult train(const sim::SimConfig& sim_cfg, const PpoHyperparams& hp,
                  const ctrl::GainBounds& bounds, const std::string& out_dir) {
  if (!hp.valid() || !sim_cfg.valid()) {
    throw std::invalid_argument("invalid training configuration");
  }
  const bool write_files = !out_dir.empty();
  if (write_files) std::filesystem::create_directories(out_dir);

  Rng init_rng(derive_seed(hp.seed, 0));
  Rng action_rng(derive_seed(hp.seed, 2));
  Rng shuffle_rng(derive_seed(hp.seed, 3));

  TrainResult result;
  result.params =
      nn::init_params(init_rng, hp.policy_bias_init, hp.log_std_init);
  nn::AdamState adam;
  adam.lr = hp.lr;

  sim::Environment env(sim_cfg, derive_seed(hp.seed, 1));
  eval::LegTracker tracker(sim_cfg.censor_steps);
  tracker.begin(env.state().position, env.state().target, 0);
  sim::ErrorSignal obs = env.observe();

  std::unique_ptr<io::CsvWriter> train_csv;
  std::unique_ptr<io::CsvWriter> legs_csv;
  if (write_files) {
    train_csv = std::make_unique<io::CsvWriter>(
        out_dir + "/training.csv", "airpid.training.v1",
        std::vector<std::string>{"iteration", "timestep", "mean_reward_raw",
                                 "mean_leg_effective_speed", "settling_time_s",
                                 "overshoot_m", "surrogate", "value_loss",
                                 "entropy", "clip_fraction"});
    legs_csv = std::make_unique<io::CsvWriter>(
        out_dir + "/legs.csv", "airpid.training-legs.v1",
        std::vector<std::string>{"leg_index", "end_timestep", "distance_m",
                                 "steps", "effective_speed", "settling_time_s",
                                 "overshoot_m", "completed", "censored"});
  }

  long steps_done = 0;
  int iteration = 0;
  std::size_t legs_reported = 0;

  while (steps_done < hp.total_timesteps) {
    iteration += 1;
    const int horizon = static_cast<int>(
        std::min<long>(hp.horizon, hp.total_timesteps - steps_done));

    RolloutBuffer buffer;
    double raw_reward_sum = 0.0;

    for (int t = 0; t < horizon; ++t) {
      const auto obs_norm = ctrl::normalize_observation(obs);
      const auto fwd = nn::forward(result.params, obs_norm);
      const auto sample = nn::sample_action(fwd.mean, fwd.log_std, action_rng);
      const ctrl::Gains gains = ctrl::squash_gains(sample.raw, bounds);
      const Vec3 leg_target = tracker.target();
      const Vec3 pos_before = env.state().position;
      const Vec3 cmd = ctrl::command_vector(
          ctrl::normalize_speed(ctrl::pid_speed(gains, obs)), leg_target,
          pos_before);

      const auto outcome = env.step(cmd);
      raw_reward_sum += outcome.reward;
      tracker.record(env.state().position,
                     sim::position_error(leg_target, env.state().position));

      const bool terminal_fault = outcome.fault;
      const bool truncated = outcome.episode_done && !terminal_fault;
      const bool done = terminal_fault || truncated;
      double boot = 0.0;
      if (truncated) {
        boot = nn::forward(result.params,
                           ctrl::normalize_observation(outcome.observation))
                   .value;
      }
      buffer.push(obs_norm, sample.raw, sample.log_prob,
                  outcome.reward / hp.reward_scale, fwd.value, done, truncated,
                  boot);

      if (outcome.leg_completed) {
        tracker.finish(true, false);
        tracker.begin(env.state().position, env.state().target,
                      env.state().episode_timestep);
      }
      if (done) {
        tracker.finish(false, truncated);
        obs = env.reset();
        tracker.begin(env.state().position, env.state().target, 0);
      } else {
        obs = outcome.observation;
      }
      steps_done += 1;
    }

    const double last_value =
        nn::forward(result.params, ctrl::normalize_observation(obs)).value;
    compute_gae(buffer, hp.gamma, hp.gae_lambda, last_value);
    normalize_advantages(buffer);

    // K epochs of shuffled minibatches.
    std::vector<int> order(buffer.size());
    std::iota(order.begin(), order.end(), 0);
    double surr_sum = 0.0, vloss_sum = 0.0, ent_sum = 0.0, clip_sum = 0.0;
    int updates = 0;
    std::vector<double> grad(nn::ParamLayout::total, 0.0);
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
      // Fisher-Yates with our own rng so the order is seed-stable.
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(shuffle_rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
      }
      for (std::size_t start = 0; start < order.size();
           start += hp.minibatch) {
        const std::size_t end =
            std::min(order.size(), start + hp.minibatch);
        std::vector<Sample> batch;
        batch.reserve(end - start);
        for (std::size_t k = start; k < end; ++k) {
          const int idx = order[k];
          batch.push_back(Sample{buffer.obs[idx], buffer.raw_action[idx],
                                 buffer.old_log_prob[idx],
                                 buffer.advantage[idx],
                                 buffer.value_target[idx]});
        }
        const LossStats stats =
            ppo_loss_grad(result.params, batch, hp, grad);
        if (!std::isfinite(stats.loss)) {
          if (write_files) {
            dump_minibatch(out_dir + "/diverged_minibatch.csv", batch, stats);
          }
          throw std::runtime_error(
              "non-finite PPO loss at iteration " + std::to_string(iteration));
        }
        nn::adam_step(adam, result.params, grad);
        surr_sum += stats.surrogate;
        vloss_sum += stats.value_loss;
        ent_sum += stats.entropy;
        clip_sum += stats.clip_fraction;
        updates += 1;
      }
    }

    // Per-leg stream for the legs that ended during this iteration.
    std::vector<double> iter_speeds, iter_settlings, iter_overshoots;
    for (; legs_reported < tracker.legs.size(); ++legs_reported) {
      const auto& leg = tracker.legs[legs_reported];
      const auto m = metrics::compute_leg_metrics(leg, sim_cfg);
      if (!m.censored) {
        iter_speeds.push_back(m.effective_speed);
        if (m.settling_time) iter_settlings.push_back(*m.settling_time);
        if (m.overshoot) iter_overshoots.push_back(*m.overshoot);
      }
      LegRecord rec;
      rec.leg_index = static_cast<int>(legs_reported);
      rec.end_timestep = steps_done;  // iteration-resolution end marker
      rec.distance_m = norm(leg.target - leg.start);
      rec.steps = static_cast<int>(leg.pe.size());
      rec.effective_speed = m.effective_speed;
      rec.settling_time_s =
          m.settling_time ? *m.settling_time
                          : std::numeric_limits<double>::infinity();
      rec.overshoot_m = m.overshoot
                            ? *m.overshoot
                            : std::numeric_limits<double>::quiet_NaN();
      rec.completed = m.completed;
      rec.censored = m.censored;
      result.report.legs.push_back(rec);
      if (legs_csv) {
        legs_csv->row({std::to_string(rec.leg_index),
                       std::to_string(rec.end_timestep),
                       io::fmt_double(rec.distance_m),
                       std::to_string(rec.steps),
                       io::fmt_double(rec.effective_speed),
                       io::fmt_double(rec.settling_time_s),
                       io::fmt_double(rec.overshoot_m),
                       std::to_string(rec.completed ? 1 : 0),
                       std::to_string(rec.censored ? 1 : 0)});
      }
    }

    IterationRecord it;
    it.iteration = iteration;
    it.timestep = steps_done;
    it.mean_reward_raw = raw_reward_sum / horizon;
    it.mean_leg_effective_speed =
        iter_speeds.empty()
            ? std::numeric_limits<double>::quiet_NaN()
            : std::accumulate(iter_speeds.begin(), iter_speeds.end(), 0.0) /
                  static_cast<double>(iter_speeds.size());
    it.settling_time_s = median_or_nan(iter_settlings);
    it.overshoot_m = median_or_nan(iter_overshoots);
    it.surrogate = surr_sum / updates;
    it.value_loss = vloss_sum / updates;
    it.entropy = ent_sum / updates;
    it.clip_fraction = clip_sum / updates;
    result.report.iterations.push_back(it);

    if (train_csv) {
      train_csv->row({std::to_string(it.iteration),
                      std::to_string(it.timestep),
                      io::fmt_double(it.mean_reward_raw),
                      io::fmt_double(it.mean_leg_effective_speed),
                      io::fmt_double(it.settling_time_s),
                      io::fmt_double(it.overshoot_m),
                      io::fmt_double(it.surrogate),
                      io::fmt_double(it.value_loss),
                      io::fmt_double(it.entropy),
                      io::fmt_double(it.clip_fraction)});
    }
    if (write_files) {
      char name[64];
      std::snprintf(name, sizeof(name), "/checkpoint_iter_%03d.bin",
                    iteration);
      nn::save_checkpoint(result.params, out_dir + name);
    }
  }

  if (write_files) {
    nn::save_checkpoint(result.params, out_dir + "/checkpoint_final.bin");
  }
  return result;
}

}  // namespace airpid::ppo
