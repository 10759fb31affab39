#ifndef AIRPID_PPO_HPP_
#define AIRPID_PPO_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "airpid/controller.hpp"
#include "airpid/metrics.hpp"
#include "airpid/network.hpp"
#include "airpid/sim_env.hpp"

namespace airpid::ppo {

struct PpoHyperparams {
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double c1 = 0.5;   // value-loss coefficient
  double c2 = 0.01;  // entropy coefficient
  int horizon = 1024;
  int epochs = 10;
  int minibatch = 64;
  long total_timesteps = 20000;
  double lr = 3e-4;
  double reward_scale = 1000.0;  // critic sees reward / reward_scale
  double policy_bias_init = nn::kPolicyBiasInit;
  double log_std_init = 0.0;
  std::uint64_t seed = 42;

  bool valid() const {
    return clip_epsilon > 0 && clip_epsilon < 1 && gamma > 0 && gamma <= 1 &&
           gae_lambda >= 0 && gae_lambda <= 1 && minibatch <= horizon &&
           minibatch >= 1 && c1 >= 0 && c2 >= 0 && horizon >= 1 &&
           epochs >= 1 && total_timesteps >= 1 && lr > 0 && reward_scale > 0;
  }
};

struct RolloutBuffer {
  std::vector<std::array<double, nn::kObsDim>> obs;  // normalized
  std::vector<std::array<double, nn::kActionDim>> raw_action;
  std::vector<double> old_log_prob;
  std::vector<double> reward;  // scaled
  std::vector<double> value;
  std::vector<std::uint8_t> done;       // episode boundary after this step
  std::vector<std::uint8_t> truncated;  // boundary was the episode cap
  std::vector<double> boot_value;       // V of post-step obs, truncated steps
  std::vector<double> advantage;        // filled by compute_gae
  std::vector<double> value_target;

  std::size_t size() const { return obs.size(); }
  void push(const std::array<double, nn::kObsDim>& o,
            const std::array<double, nn::kActionDim>& a, double lp, double r,
            double v, bool d, bool trunc, double boot);
};

// delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t), accumulated with
// the lambda-discounted recurrence; cap-truncated steps bootstrap with
// the stored post-step value. Targets are advantage + value.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda,
                 double last_value);

// Rescales advantages to zero mean, unit variance.
void normalize_advantages(RolloutBuffer& buffer);

// Eq.-level pieces, exposed for direct testing.
double clipped_surrogate(double ratio, double advantage, double epsilon);
double value_loss(const std::vector<double>& v_pred,
                  const std::vector<double>& v_target);
double combined_objective(double surrogate, double vloss, double entropy,
                          double c1, double c2);

struct Sample {
  std::array<double, nn::kObsDim> obs;
  std::array<double, nn::kActionDim> raw_action;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
};

struct LossStats {
  double loss = 0.0;  // negated combined objective (minimized)
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Minibatch loss only (used by finite-difference checks).
LossStats ppo_loss(const nn::NetworkParams& params,
                   const std::vector<Sample>& batch,
                   const PpoHyperparams& hp);

// Loss plus analytic gradient. The parallel kernel partitions the batch
// into fixed-size blocks and reduces them in block order, so the result
// does not depend on the thread count. The serial kernel is the reference
// path used in tests and the benchmark.
LossStats ppo_loss_grad(const nn::NetworkParams& params,
                        const std::vector<Sample>& batch,
                        const PpoHyperparams& hp, std::vector<double>& grad);
LossStats ppo_loss_grad_serial(const nn::NetworkParams& params,
                               const std::vector<Sample>& batch,
                               const PpoHyperparams& hp,
                               std::vector<double>& grad);

struct IterationRecord {
  int iteration = 0;
  long timestep = 0;
  double mean_reward_raw = 0.0;
  double mean_leg_effective_speed = 0.0;  // NaN when no legs ended
  double settling_time_s = 0.0;           // median over the iteration's legs
  double overshoot_m = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

struct LegRecord {
  int leg_index = 0;
  long end_timestep = 0;
  double distance_m = 0.0;
  int steps = 0;
  double effective_speed = 0.0;
  double settling_time_s = 0.0;  // +inf when never settled
  double overshoot_m = 0.0;      // NaN when undefined
  bool completed = false;
  bool censored = false;
};

struct TrainReport {
  std::vector<IterationRecord> iterations;
  std::vector<LegRecord> legs;
};

struct TrainResult {
  nn::NetworkParams params;
  TrainReport report;
};

// Full training loop. Writes per-iteration checkpoints, training.csv and
// legs.csv under out_dir (skipped when out_dir is empty). Deterministic
// for a fixed (sim_cfg, hp) pair.
TrainResult train(const sim::SimConfig& sim_cfg, const PpoHyperparams& hp,
                  const ctrl::GainBounds& bounds, const std::string& out_dir);

}  // namespace airpid::ppo

#endif  // AIRPID_PPO_HPP_
