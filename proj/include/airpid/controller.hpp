#ifndef AIRPID_CONTROLLER_HPP_
#define AIRPID_CONTROLLER_HPP_

#include <variant>

#include "airpid/network.hpp"
#include "airpid/rng.hpp"
#include "airpid/sim_env.hpp"
#include "airpid/vec3.hpp"

namespace airpid::ctrl {

struct Gains {
  double kp = 0.0;  // 1/s
  double ki = 0.0;  // 1/s^2
  double kd = 0.0;  // dimensionless
};

struct GainBounds {
  double kp_max = 4.0;
  double ki_max = 0.5;
  double kd_max = 2.0;
};

// Fixed affine observation scaling applied before the policy trunk.
std::array<double, 3> normalize_observation(const sim::ErrorSignal& e);

double pid_speed(const Gains& g, const sim::ErrorSignal& e);

// v / (|v| + 1): sign-preserving squash, strictly inside (-1, 1).
double normalize_speed(double v);

// Scalar speed applied along the unit vector from position to target;
// zero when the two nearly coincide.
Vec3 command_vector(double norm_v, const Vec3& target, const Vec3& position);

// Sigmoid squash of a raw policy sample into [0, max] per gain.
Gains squash_gains(const std::array<double, nn::kActionDim>& raw,
                   const GainBounds& bounds);

struct FixedPid {
  Gains gains;
};
struct FrozenSteadyState {
  Gains gains;
};
struct AdaptivePolicy {
  const nn::NetworkParams* params = nullptr;
};

using ControllerMode = std::variant<FixedPid, FrozenSteadyState, AdaptivePolicy>;

struct ActResult {
  Gains gains;
  Vec3 v_cmd;
  // Meaningful only for AdaptivePolicy with sampling.
  std::array<double, nn::kActionDim> raw_action{};
  double log_prob = 0.0;
  double value = 0.0;
};

// One control decision. Adaptive mode queries the policy every step;
// deterministic=true uses the Gaussian means (evaluation), otherwise a
// sample is drawn from rng.
ActResult act(const ControllerMode& mode, const sim::ErrorSignal& e,
              const GainBounds& bounds, const Vec3& target,
              const Vec3& position, Rng* rng, bool deterministic);

// Deterministic policy output at a probe error signal; used to build the
// frozen steady-state-gain baseline.
Gains extract_steady_gains(const nn::NetworkParams& params,
                           const sim::ErrorSignal& probe,
                           const GainBounds& bounds);

}  // namespace airpid::ctrl

#endif  // AIRPID_CONTROLLER_HPP_
