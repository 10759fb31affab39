#include "airpid/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace airpid::ctrl {

std::array<double, 3> normalize_observation(const sim::ErrorSignal& e) {
  return {e.pe / 10.0, e.dpe / 2.0, e.ipe / 50.0};
}

double pid_speed(const Gains& g, const sim::ErrorSignal& e) {
  return g.kp * e.pe + g.kd * e.dpe + g.ki * e.ipe;
}

double normalize_speed(double v) { return v / (std::abs(v) + 1.0); }

Vec3 command_vector(double norm_v, const Vec3& target, const Vec3& position) {
  const Vec3 d = target - position;
  const double n = norm(d);
  if (n < 1e-9) return Vec3{};
  return (norm_v / n) * d;
}

Gains squash_gains(const std::array<double, nn::kActionDim>& raw,
                   const GainBounds& bounds) {
  const auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  Gains g;
  g.kp = bounds.kp_max * sigmoid(raw[0]);
  g.ki = bounds.ki_max * sigmoid(raw[1]);
  g.kd = bounds.kd_max * sigmoid(raw[2]);
  return g;
}

namespace {

ActResult act_fixed(const Gains& g, const sim::ErrorSignal& e,
                    const Vec3& target, const Vec3& position) {
  ActResult r;
  r.gains = g;
  r.v_cmd = command_vector(normalize_speed(pid_speed(g, e)), target, position);
  return r;
}

}  // namespace

ActResult act(const ControllerMode& mode, const sim::ErrorSignal& e,
              const GainBounds& bounds, const Vec3& target,
              const Vec3& position, Rng* rng, bool deterministic) {
  if (const auto* fixed = std::get_if<FixedPid>(&mode)) {
    return act_fixed(fixed->gains, e, target, position);
  }
  if (const auto* frozen = std::get_if<FrozenSteadyState>(&mode)) {
    return act_fixed(frozen->gains, e, target, position);
  }
  const auto& adaptive = std::get<AdaptivePolicy>(mode);
  if (adaptive.params == nullptr) {
    throw std::runtime_error("adaptive controller has no policy loaded");
  }
  const auto fwd = nn::forward(*adaptive.params, normalize_observation(e));

  ActResult r;
  r.value = fwd.value;
  if (deterministic) {
    r.raw_action = fwd.mean;
    r.log_prob = nn::log_prob(fwd.mean, fwd.mean, fwd.log_std);
  } else {
    const auto s = nn::sample_action(fwd.mean, fwd.log_std, *rng);
    r.raw_action = s.raw;
    r.log_prob = s.log_prob;
  }
  r.gains = squash_gains(r.raw_action, bounds);
  r.v_cmd =
      command_vector(normalize_speed(pid_speed(r.gains, e)), target, position);
  return r;
}

Gains extract_steady_gains(const nn::NetworkParams& params,
                           const sim::ErrorSignal& probe,
                           const GainBounds& bounds) {
  const auto fwd = nn::forward(params, normalize_observation(probe));
  return squash_gains(fwd.mean, bounds);
}

}  // namespace airpid::ctrl
