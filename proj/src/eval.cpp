#include "airpid/eval.hpp"

#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "airpid/csv.hpp"

namespace airpid::eval {

void LegTracker::begin(const Vec3& start, const Vec3& target,
                       int start_timestep) {
  cur_ = metrics::LegLog{};
  cur_.start = start;
  cur_.target = target;
  cur_.start_timestep = start_timestep;
  active_ = true;
}

void LegTracker::record(const Vec3& position, double pe) {
  cur_.positions.push_back(position);
  cur_.pe.push_back(pe);
}

void LegTracker::finish(bool completed, bool at_episode_cap) {
  if (!active_) return;
  cur_.completed = completed;
  cur_.censored = !completed && at_episode_cap &&
                  static_cast<int>(cur_.pe.size()) < censor_steps_;
  legs.push_back(std::move(cur_));
  cur_ = metrics::LegLog{};
  active_ = false;
}

EpisodeResult run_episode(const ctrl::ControllerMode& mode,
                          const ctrl::GainBounds& bounds,
                          const sim::SimConfig& cfg, std::uint64_t env_seed,
                          bool deterministic, Rng* action_rng) {
  sim::Environment env(cfg, env_seed);
  LegTracker tracker(cfg.censor_steps);
  EpisodeResult out;

  sim::ErrorSignal obs = env.observe();
  tracker.begin(env.state().position, env.state().target, 0);

  for (int step = 0; step < cfg.episode_cap; ++step) {
    const Vec3 pos_before = env.state().position;
    const Vec3 leg_target = tracker.target();

    const auto action = ctrl::act(mode, obs, bounds, leg_target, pos_before,
                                  action_rng, deterministic);
    const auto outcome = env.step(action.v_cmd);
    out.total_raw_reward += outcome.reward;
    out.steps += 1;

    // pe is logged against the leg the step belonged to, so it stays
    // recomputable from position and the leg's target.
    const double pe =
        sim::position_error(leg_target, env.state().position);
    tracker.record(env.state().position, pe);

    TrajRow row;
    row.t = cfg.dt * (step + 1);
    row.position = env.state().position;
    row.velocity = env.state().velocity;
    row.gains = action.gains;
    row.command = action.v_cmd;
    row.pe = pe;
    row.leg_id = static_cast<int>(tracker.legs.size());
    out.rows.push_back(row);

    if (outcome.fault) {
      out.fault = true;
      tracker.finish(false, false);
      break;
    }
    if (outcome.leg_completed) {
      tracker.finish(true, false);
      tracker.begin(env.state().position, env.state().target,
                    env.state().episode_timestep);
    }
    if (outcome.episode_done) {
      tracker.finish(false, true);
      break;
    }
    obs = outcome.observation;
  }
  tracker.finish(false, true);

  out.legs = std::move(tracker.legs);
  out.leg_metrics.reserve(out.legs.size());
  for (const auto& leg : out.legs) {
    out.leg_metrics.push_back(metrics::compute_leg_metrics(leg, cfg));
  }
  return out;
}

std::vector<EpisodeResult> run_episodes_serial(const ctrl::ControllerMode& mode,
                                               const ctrl::GainBounds& bounds,
                                               const sim::SimConfig& cfg,
                                               std::uint64_t master_seed,
                                               int episodes) {
  std::vector<EpisodeResult> results(episodes);
  for (int i = 0; i < episodes; ++i) {
    results[i] = run_episode(mode, bounds, cfg, derive_seed(master_seed, i));
  }
  return results;
}

std::vector<EpisodeResult> run_episodes(const ctrl::ControllerMode& mode,
                                        const ctrl::GainBounds& bounds,
                                        const sim::SimConfig& cfg,
                                        std::uint64_t master_seed,
                                        int episodes, bool parallel) {
  if (!parallel) return run_episodes_serial(mode, bounds, cfg, master_seed,
                                            episodes);
  std::vector<EpisodeResult> results(episodes);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < episodes; ++i) {
    results[i] = run_episode(mode, bounds, cfg, derive_seed(master_seed, i));
  }
  return results;
}

sim::ErrorSignal steady_state_probe(const nn::NetworkParams& params,
                                    const ctrl::GainBounds& bounds,
                                    const sim::SimConfig& cfg,
                                    std::uint64_t env_seed) {
  sim::Environment env(cfg, env_seed);
  ctrl::ControllerMode mode = ctrl::AdaptivePolicy{&params};
  sim::ErrorSignal obs = env.observe();
  sim::ErrorSignal last = obs;
  for (int step = 0; step < cfg.episode_cap; ++step) {
    const auto action = ctrl::act(mode, obs, bounds, env.state().target,
                                  env.state().position, nullptr, true);
    const auto outcome = env.step(action.v_cmd);
    if (outcome.fault) break;
    if (outcome.leg_completed) {
      // Converged: the hold window just finished at this error signal.
      last.pe = cfg.settle_tolerance;
      last.dpe = 0.0;
      return last;
    }
    last = outcome.observation;
    obs = outcome.observation;
    if (outcome.episode_done) break;
  }
  // No leg converged; fall back to a zero-integral probe.
  return sim::ErrorSignal{cfg.settle_tolerance, 0.0, 0.0};
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajRow>& rows) {
  io::CsvWriter w(path, "airpid.trajectory.v1",
                  {"t", "x", "y", "z", "vx", "vy", "vz", "kp", "ki", "kd",
                   "cmd_x", "cmd_y", "cmd_z", "pe", "leg_id"});
  for (const auto& r : rows) {
    w.row({io::fmt_double(r.t), io::fmt_double(r.position.x),
           io::fmt_double(r.position.y), io::fmt_double(r.position.z),
           io::fmt_double(r.velocity.x), io::fmt_double(r.velocity.y),
           io::fmt_double(r.velocity.z), io::fmt_double(r.gains.kp),
           io::fmt_double(r.gains.ki), io::fmt_double(r.gains.kd),
           io::fmt_double(r.command.x), io::fmt_double(r.command.y),
           io::fmt_double(r.command.z), io::fmt_double(r.pe),
           std::to_string(r.leg_id)});
  }
}

void write_legs_csv(const std::string& path,
                    const std::vector<metrics::LegLog>& legs,
                    const std::vector<metrics::LegMetrics>& leg_metrics,
                    const sim::SimConfig& cfg) {
  io::CsvWriter w(
      path, "airpid.legs.v1",
      {"leg_id", "start_x", "start_y", "start_z", "target_x", "target_y",
       "target_z", "start_step", "steps", "distance_m", "effective_speed",
       "settling_time_s", "overshoot_m", "final_error_m", "completed",
       "censored"});
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const auto& leg = legs[i];
    const auto& m = leg_metrics[i];
    const double settling =
        m.settling_time ? *m.settling_time
                        : std::numeric_limits<double>::infinity();
    const double os = m.overshoot
                          ? *m.overshoot
                          : std::numeric_limits<double>::quiet_NaN();
    w.row({std::to_string(i), io::fmt_double(leg.start.x),
           io::fmt_double(leg.start.y), io::fmt_double(leg.start.z),
           io::fmt_double(leg.target.x), io::fmt_double(leg.target.y),
           io::fmt_double(leg.target.z), std::to_string(leg.start_timestep),
           std::to_string(leg.pe.size()),
           io::fmt_double(norm(leg.target - leg.start)),
           io::fmt_double(m.effective_speed), io::fmt_double(settling),
           io::fmt_double(os), io::fmt_double(m.final_error),
           std::to_string(m.completed ? 1 : 0),
           std::to_string(m.censored ? 1 : 0)});
  }
}

}  // namespace airpid::eval
