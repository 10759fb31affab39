#include "airpid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace airpid::metrics {

double effective_speed(const LegLog& leg, const sim::SimConfig& cfg) {
  if (!leg.completed) return 0.0;
  const double distance = norm(leg.target - leg.start);
  return sim::effective_speed_of_leg(distance,
                                     static_cast<int>(leg.pe.size()), cfg);
}

std::optional<double> settling_time(const LegLog& leg, double tolerance,
                                    int hold_steps, double dt) {
  const int n = static_cast<int>(leg.pe.size());
  int run = 0;  // consecutive in-tolerance samples ending at index i
  for (int i = 0; i < n; ++i) {
    run = leg.pe[i] <= tolerance ? run + 1 : 0;
    if (run >= hold_steps) {
      return dt * static_cast<double>(i + 1 - hold_steps);
    }
  }
  return std::nullopt;
}

std::optional<double> overshoot(const LegLog& leg) {
  const Vec3 axis = leg.target - leg.start;
  const double len = norm(axis);
  if (len < 1e-12) return std::nullopt;
  const Vec3 u = (1.0 / len) * axis;
  double peak = 0.0;
  bool passed = false;
  for (const Vec3& p : leg.positions) {
    const double forward = dot(p - leg.target, u);
    if (forward > 0.0) {
      passed = true;
      peak = std::max(peak, forward);
    }
  }
  if (!passed) return std::nullopt;
  return peak;
}

LegMetrics compute_leg_metrics(const LegLog& leg, const sim::SimConfig& cfg) {
  LegMetrics m;
  m.effective_speed = effective_speed(leg, cfg);
  m.settling_time =
      settling_time(leg, cfg.settle_tolerance, cfg.hold_steps, cfg.dt);
  m.overshoot = overshoot(leg);
  m.final_error = leg.pe.empty() ? norm(leg.target - leg.start) : leg.pe.back();
  m.completed = leg.completed;
  m.censored = leg.censored;
  return m;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

struct Pools {
  std::vector<double> speeds;
  std::vector<double> settlings;
  std::vector<double> overshoots;
  int counted = 0;
  int unsettled = 0;
};

Pools pool(const std::vector<LegMetrics>& legs) {
  Pools p;
  for (const auto& m : legs) {
    if (m.censored) continue;
    p.counted += 1;
    p.speeds.push_back(m.effective_speed);
    if (m.settling_time) {
      p.settlings.push_back(*m.settling_time);
    } else {
      p.unsettled += 1;
    }
    if (m.overshoot) p.overshoots.push_back(*m.overshoot);
  }
  return p;
}

double pct_change(double from, double to) {
  if (from == 0.0 || std::isnan(from) || std::isnan(to)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return 100.0 * (to - from) / from;
}

}  // namespace

ImprovementReport improvement_report(const std::vector<LegMetrics>& adaptive,
                                     const std::vector<LegMetrics>& baseline) {
  const Pools a = pool(adaptive);
  const Pools b = pool(baseline);

  ImprovementReport r;
  r.adaptive_median_speed = median(a.speeds);
  r.baseline_median_speed = median(b.speeds);
  r.adaptive_median_settling = median(a.settlings);
  r.baseline_median_settling = median(b.settlings);
  r.adaptive_median_overshoot = median(a.overshoots);
  r.baseline_median_overshoot = median(b.overshoots);
  r.speed_pct = pct_change(r.baseline_median_speed, r.adaptive_median_speed);
  r.settling_pct =
      pct_change(r.baseline_median_settling, r.adaptive_median_settling);
  r.overshoot_pct =
      pct_change(r.baseline_median_overshoot, r.adaptive_median_overshoot);
  r.adaptive_failure_rate =
      a.counted > 0 ? static_cast<double>(a.unsettled) / a.counted : 0.0;
  r.baseline_failure_rate =
      b.counted > 0 ? static_cast<double>(b.unsettled) / b.counted : 0.0;
  return r;
}

}  // namespace airpid::metrics
