#ifndef AIRPID_NETWORK_HPP_
#define AIRPID_NETWORK_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "airpid/rng.hpp"

namespace airpid::nn {

// Shared-trunk actor-critic: 3 -> 64 -> 64 tanh trunk, affine policy head
// (3 Gaussian means plus a state-independent log-std vector) and an affine
// scalar value head. Parameters live in one flat 64-bit buffer so the
// optimizer and the finite-difference checks can treat them uniformly.
inline constexpr int kObsDim = 3;
inline constexpr int kHiddenDim = 64;
inline constexpr int kActionDim = 3;

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Initial policy-head bias: squashed through the gain sigmoid this puts
// the untrained controller at low gains.
inline constexpr double kPolicyBiasInit = -2.5;

struct ParamLayout {
  static constexpr int w1 = 0;
  static constexpr int b1 = w1 + kHiddenDim * kObsDim;
  static constexpr int w2 = b1 + kHiddenDim;
  static constexpr int b2 = w2 + kHiddenDim * kHiddenDim;
  static constexpr int wp = b2 + kHiddenDim;
  static constexpr int bp = wp + kActionDim * kHiddenDim;
  static constexpr int log_std = bp + kActionDim;
  static constexpr int wv = log_std + kActionDim;
  static constexpr int bv = wv + kHiddenDim;
  static constexpr int total = bv + 1;
};

struct NetworkParams {
  std::vector<double> data = std::vector<double>(ParamLayout::total, 0.0);

  double* w1() { return data.data() + ParamLayout::w1; }
  double* b1() { return data.data() + ParamLayout::b1; }
  double* w2() { return data.data() + ParamLayout::w2; }
  double* b2() { return data.data() + ParamLayout::b2; }
  double* wp() { return data.data() + ParamLayout::wp; }
  double* bp() { return data.data() + ParamLayout::bp; }
  double* log_std() { return data.data() + ParamLayout::log_std; }
  double* wv() { return data.data() + ParamLayout::wv; }
  double* bv() { return data.data() + ParamLayout::bv; }
  const double* w1() const { return data.data() + ParamLayout::w1; }
  const double* b1() const { return data.data() + ParamLayout::b1; }
  const double* w2() const { return data.data() + ParamLayout::w2; }
  const double* b2() const { return data.data() + ParamLayout::b2; }
  const double* wp() const { return data.data() + ParamLayout::wp; }
  const double* bp() const { return data.data() + ParamLayout::bp; }
  const double* log_std() const { return data.data() + ParamLayout::log_std; }
  const double* wv() const { return data.data() + ParamLayout::wv; }
  const double* bv() const { return data.data() + ParamLayout::bv; }
};

// Scaled-normal initialization: gain sqrt(2) on the trunk, 0.01 on the
// policy head so early gains sit near the bound midpoints, 1.0 on the
// value head, zero biases and log-std.
NetworkParams init_params(Rng& rng, double policy_bias = kPolicyBiasInit,
                          double log_std = 0.0);

struct ForwardTrace {
  std::array<double, kObsDim> obs{};
  std::array<double, kHiddenDim> h1{};
  std::array<double, kHiddenDim> h2{};
};

struct ForwardResult {
  std::array<double, kActionDim> mean{};
  std::array<double, kActionDim> log_std{};  // clamped
  double value = 0.0;
};

ForwardResult forward(const NetworkParams& params,
                      const std::array<double, kObsDim>& obs,
                      ForwardTrace* trace = nullptr);

// Diagonal Gaussian sample and its log density under (mean, log_std).
struct ActionSample {
  std::array<double, kActionDim> raw{};
  double log_prob = 0.0;
};

ActionSample sample_action(const std::array<double, kActionDim>& mean,
                           const std::array<double, kActionDim>& log_std,
                           Rng& rng);

double log_prob(const std::array<double, kActionDim>& raw,
                const std::array<double, kActionDim>& mean,
                const std::array<double, kActionDim>& log_std);

double entropy(const std::array<double, kActionDim>& log_std);

// Upstream gradients of a scalar loss with respect to the head outputs.
struct HeadGrads {
  std::array<double, kActionDim> d_mean{};
  std::array<double, kActionDim> d_log_std{};
  double d_value = 0.0;
};

// Accumulates dLoss/dparams into grad (same flat layout as params).
// The log-std clamp gates its gradient.
void backward(const NetworkParams& params, const ForwardTrace& trace,
              const HeadGrads& up, std::vector<double>& grad);

struct AdamState {
  std::vector<double> m = std::vector<double>(ParamLayout::total, 0.0);
  std::vector<double> v = std::vector<double>(ParamLayout::total, 0.0);
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(AdamState& adam, NetworkParams& params,
               const std::vector<double>& grad);

// Checkpoint I/O: magic "AIRPPO1\0", uint32 dims {obs, hidden, actions},
// then the flat parameter buffer as little-endian doubles.
void save_checkpoint(const NetworkParams& params, const std::string& path);

// Returns false (with a message) on missing file, bad magic or bad dims.
bool load_checkpoint(NetworkParams& params, const std::string& path,
                     std::string* error = nullptr);

}  // namespace airpid::nn

#endif  // AIRPID_NETWORK_HPP_
