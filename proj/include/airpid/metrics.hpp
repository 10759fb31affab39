#ifndef AIRPID_METRICS_HPP_
#define AIRPID_METRICS_HPP_

#include <optional>
#include <vector>

#include "airpid/sim_env.hpp"
#include "airpid/vec3.hpp"

namespace airpid::metrics {

// One leg of a logged trajectory: positions (and their position errors)
// recorded after each control step, plus the leg's endpoints.
struct LegLog {
  Vec3 start;
  Vec3 target;
  std::vector<Vec3> positions;  // post-step, one per step
  std::vector<double> pe;       // same length as positions
  bool completed = false;       // hold window finished
  bool censored = false;        // cut by the episode cap before it could fail
  int start_timestep = 0;
};

struct LegMetrics {
  double effective_speed = 0.0;            // 0 when the goal was not reached
  std::optional<double> settling_time;     // seconds; empty = NOT_SETTLED
  std::optional<double> overshoot;         // meters; empty = UNDEFINED
  double final_error = 0.0;                // meters
  bool completed = false;
  bool censored = false;
};

double effective_speed(const LegLog& leg, const sim::SimConfig& cfg);

// dt * T_s for the first index T_s whose full hold window stays within
// tolerance; empty when no such window exists.
std::optional<double> settling_time(const LegLog& leg, double tolerance,
                                    int hold_steps, double dt);

// Max forward excursion past the target along the start->target axis;
// empty when the target is never passed (or start == target).
std::optional<double> overshoot(const LegLog& leg);

LegMetrics compute_leg_metrics(const LegLog& leg, const sim::SimConfig& cfg);

struct ImprovementReport {
  double speed_pct = 0.0;      // positive = adaptive faster
  double settling_pct = 0.0;   // negative = adaptive settles sooner
  double overshoot_pct = 0.0;  // negative = adaptive overshoots less
  double adaptive_median_speed = 0.0;
  double baseline_median_speed = 0.0;
  double adaptive_median_settling = 0.0;
  double baseline_median_settling = 0.0;
  double adaptive_median_overshoot = 0.0;
  double baseline_median_overshoot = 0.0;
  double adaptive_failure_rate = 0.0;  // fraction of legs with no settle
  double baseline_failure_rate = 0.0;
};

// Percentage change of medians. Legs without a defined settling time or
// overshoot are excluded from the corresponding median and surface in the
// failure rates instead; censored legs are skipped entirely.
ImprovementReport improvement_report(const std::vector<LegMetrics>& adaptive,
                                     const std::vector<LegMetrics>& baseline);

double median(std::vector<double> values);

}  // namespace airpid::metrics

#endif  // AIRPID_METRICS_HPP_
