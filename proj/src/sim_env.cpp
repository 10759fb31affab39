#include "airpid/sim_env.hpp"

#include <algorithm>
#include <cmath>

namespace airpid::sim {

double position_error(const Vec3& target, const Vec3& current) {
  return norm(target - current);
}

Vec3 sample_target(Rng& rng, const Box& workspace) {
  // Axis order fixed: x, y, z. Golden sequences depend on it.
  Vec3 t;
  t.x = rng.uniform(workspace.min.x, workspace.max.x);
  t.y = rng.uniform(workspace.min.y, workspace.max.y);
  t.z = rng.uniform(workspace.min.z, workspace.max.z);
  return t;
}

double effective_speed_of_leg(double distance, int timestep_count,
                              const SimConfig& cfg) {
  const int travel = timestep_count - cfg.hold_steps;
  if (travel <= 0) return 0.0;
  return distance / (cfg.dt * travel);
}

double compute_leg_reward(double distance, int timestep_count,
                          const SimConfig& cfg) {
  const double speed = effective_speed_of_leg(distance, timestep_count, cfg);
  return std::exp(std::min(10.0 * speed, cfg.reward_exp_cap));
}

Environment::Environment(const SimConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {
  reset();
}

void Environment::start_leg(const Vec3& target) {
  state_.target = target;
  state_.start_of_leg = state_.position;
  state_.integral_pe = 0.0;
  state_.prev_pe = 0.0;
  state_.leg_first_step = true;
  state_.hold_counter = 0;
  state_.leg_start_timestep = state_.episode_timestep;
}

ErrorSignal Environment::reset() {
  state_ = DroneState{};
  state_.position = cfg_.workspace.center();
  state_.velocity = Vec3{};
  legs_completed_ = 0;
  start_leg(sample_target(rng_, cfg_.workspace));
  return observe();
}

ErrorSignal observe(const DroneState& state, const SimConfig& cfg) {
  ErrorSignal e;
  e.pe = position_error(state.target, state.position);
  e.dpe = state.leg_first_step ? 0.0 : (e.pe - state.prev_pe) / cfg.dt;
  e.ipe = state.integral_pe + e.pe * cfg.dt;
  return e;
}

ErrorSignal Environment::observe() const { return sim::observe(state_, cfg_); }

StepOutcome Environment::step(const Vec3& v_cmd) {
  StepOutcome out;

  if (!is_finite(v_cmd) || norm(v_cmd) > cfg_.command_limit) {
    // Proxy for the body-angle penalty: an aggressive or broken command
    // aborts the episode with a large negative reward.
    out.fault = true;
    out.episode_done = true;
    out.reward = cfg_.fault_penalty;
    out.observation = observe();
    return out;
  }

  // Commit the current observation into the leg's error history.
  {
    const double pe_now = position_error(state_.target, state_.position);
    state_.integral_pe += pe_now * cfg_.dt;
    state_.prev_pe = pe_now;
    state_.leg_first_step = false;
  }

  // Semi-implicit Euler through the first-order velocity lag.
  state_.velocity +=
      cfg_.dt * (1.0 / cfg_.tau_v) * ((v_cmd + cfg_.wind) - state_.velocity);
  state_.position += cfg_.dt * state_.velocity;
  state_.episode_timestep += 1;

  const double pe_new = position_error(state_.target, state_.position);
  if (pe_new <= cfg_.settle_tolerance) {
    state_.hold_counter += 1;
  } else {
    state_.hold_counter = 0;
  }

  if (state_.hold_counter >= cfg_.hold_steps) {
    const int leg_steps =
        std::max(state_.episode_timestep - state_.leg_start_timestep,
                 cfg_.hold_steps + 1);
    out.leg_completed = true;
    out.leg_distance = position_error(state_.target, state_.start_of_leg);
    out.leg_timesteps = leg_steps;
    out.reward = compute_leg_reward(out.leg_distance, leg_steps, cfg_);
    legs_completed_ += 1;
    start_leg(sample_target(rng_, cfg_.workspace));
  } else {
    out.reward = cfg_.step_penalty;
  }

  out.episode_done = state_.episode_timestep >= cfg_.episode_cap;
  out.observation = observe();
  return out;
}

}  // namespace airpid::sim
