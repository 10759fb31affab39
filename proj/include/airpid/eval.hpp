#ifndef AIRPID_EVAL_HPP_
#define AIRPID_EVAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "airpid/controller.hpp"
#include "airpid/metrics.hpp"
#include "airpid/sim_env.hpp"

namespace airpid::eval {

// Accumulates per-leg trajectory slices as an episode unfolds.
class LegTracker {
 public:
  explicit LegTracker(int censor_steps) : censor_steps_(censor_steps) {}

  void begin(const Vec3& start, const Vec3& target, int start_timestep);
  void record(const Vec3& position, double pe);
  void finish(bool completed, bool at_episode_cap);
  bool active() const { return active_; }
  const Vec3& target() const { return cur_.target; }

  std::vector<metrics::LegLog> legs;

 private:
  metrics::LegLog cur_;
  bool active_ = false;
  int censor_steps_;
};

struct TrajRow {
  double t = 0.0;
  Vec3 position;
  Vec3 velocity;
  ctrl::Gains gains;
  Vec3 command;
  double pe = 0.0;
  int leg_id = 0;
};

struct EpisodeResult {
  std::vector<TrajRow> rows;
  std::vector<metrics::LegLog> legs;
  std::vector<metrics::LegMetrics> leg_metrics;
  bool fault = false;
  double total_raw_reward = 0.0;
  int steps = 0;
};

// One full episode under the given controller. Deterministic runs use the
// policy means; otherwise actions are sampled from action_rng.
EpisodeResult run_episode(const ctrl::ControllerMode& mode,
                          const ctrl::GainBounds& bounds,
                          const sim::SimConfig& cfg, std::uint64_t env_seed,
                          bool deterministic = true,
                          Rng* action_rng = nullptr);

// N episodes with per-episode seeds derived from master_seed. Episodes are
// independent and run in parallel; outputs are stored by episode index.
std::vector<EpisodeResult> run_episodes(const ctrl::ControllerMode& mode,
                                        const ctrl::GainBounds& bounds,
                                        const sim::SimConfig& cfg,
                                        std::uint64_t master_seed,
                                        int episodes, bool parallel = true);

// Serial reference for run_episodes, kept for the benchmark comparison.
std::vector<EpisodeResult> run_episodes_serial(const ctrl::ControllerMode& mode,
                                               const ctrl::GainBounds& bounds,
                                               const sim::SimConfig& cfg,
                                               std::uint64_t master_seed,
                                               int episodes);

// Converged-rollout probe for the frozen steady-state baseline: the error
// signal observed at the first leg completion of a deterministic episode.
sim::ErrorSignal steady_state_probe(const nn::NetworkParams& params,
                                    const ctrl::GainBounds& bounds,
                                    const sim::SimConfig& cfg,
                                    std::uint64_t env_seed);

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajRow>& rows);
void write_legs_csv(const std::string& path,
                    const std::vector<metrics::LegLog>& legs,
                    const std::vector<metrics::LegMetrics>& leg_metrics,
                    const sim::SimConfig& cfg);

}  // namespace airpid::eval

#endif  // AIRPID_EVAL_HPP_
