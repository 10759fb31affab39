#ifndef AIRPID_SIM_ENV_HPP_
#define AIRPID_SIM_ENV_HPP_

#include <optional>

#include "airpid/rng.hpp"
#include "airpid/vec3.hpp"

namespace airpid::sim {

struct Box {
  Vec3 min;
  Vec3 max;

  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  Vec3 center() const { return 0.5 * (min + max); }
};

struct SimConfig {
  double dt = 0.04;                    // seconds per control step
  double tau_v = 0.3;                  // inner-loop velocity lag constant, s
  Box workspace{{-6.0, -6.0, 0.5}, {6.0, 6.0, 3.0}};
  double settle_tolerance = 0.1;       // meters
  int hold_steps = 50;                 // steps inside tolerance to finish a leg
  int episode_cap = 1000;              // hard truncation
  std::uint64_t seed = 0;
  Vec3 wind{};                         // constant disturbance velocity, m/s
  double step_penalty = -0.01;         // per-step reward between completions
  double reward_exp_cap = 30.0;        // clamp on the exp() argument
  double fault_penalty = -10.0;        // bad velocity command
  double command_limit = 1.5;          // |v_cmd| above this is a fault, m/s
  // Legs cut by the episode cap before this many steps are censored in
  // metrics: the cap, not the controller, ended them.
  int censor_steps = 750;

  bool valid() const {
    return dt > 0 && tau_v > 0 && settle_tolerance > 0 && hold_steps >= 1 &&
           episode_cap > hold_steps && workspace.min.x < workspace.max.x &&
           workspace.min.y < workspace.max.y && workspace.min.z < workspace.max.z;
  }
};

// Controller observation: scalar position error, its backward-difference
// derivative, and its running integral since the current leg started.
struct ErrorSignal {
  double pe = 0.0;   // meters
  double dpe = 0.0;  // m/s
  double ipe = 0.0;  // meter-seconds
};

struct DroneState {
  Vec3 position;
  Vec3 velocity;
  Vec3 target;
  Vec3 start_of_leg;
  double integral_pe = 0.0;   // committed pe*dt terms, excludes current sample
  double prev_pe = 0.0;
  bool leg_first_step = true;
  int hold_counter = 0;
  int leg_start_timestep = 0;
  int episode_timestep = 0;
};

struct StepOutcome {
  ErrorSignal observation;
  double reward = 0.0;        // raw, unscaled
  bool leg_completed = false;
  bool episode_done = false;  // truncation at episode_cap
  bool fault = false;         // controller emitted an invalid command
  // Filled on leg completion.
  double leg_distance = 0.0;  // meters, start-of-leg to target
  int leg_timesteps = 0;
};

double position_error(const Vec3& target, const Vec3& current);

// pe from the current position, backward-difference dpe (zero on the first
// step of a leg), and the leg-local integral including the current sample.
ErrorSignal observe(const DroneState& state, const SimConfig& cfg);

Vec3 sample_target(Rng& rng, const Box& workspace);

// Eq.-style leg reward: effective speed from distance and elapsed steps,
// exponentiated with a clamped argument.
double compute_leg_reward(double distance, int timestep_count,
                          const SimConfig& cfg);

double effective_speed_of_leg(double distance, int timestep_count,
                              const SimConfig& cfg);

class Environment {
 public:
  Environment(const SimConfig& cfg, std::uint64_t seed);

  // New episode: hover at workspace center, fresh random target.
  ErrorSignal reset();

  ErrorSignal observe() const;

  StepOutcome step(const Vec3& v_cmd);

  const DroneState& state() const { return state_; }
  const SimConfig& config() const { return cfg_; }
  int legs_completed() const { return legs_completed_; }

 private:
  void start_leg(const Vec3& target);

  SimConfig cfg_;
  Rng rng_;
  DroneState state_;
  int legs_completed_ = 0;
};

}  // namespace airpid::sim

#endif  // AIRPID_SIM_ENV_HPP_
