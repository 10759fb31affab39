#include "airpid/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace airpid::nn {

namespace {
constexpr double kLn2Pi = 1.8378770664093453;  // ln(2*pi)

void fill_scaled_normal(double* w, int rows, int cols, double gain, Rng& rng) {
  const double scale = gain / std::sqrt(static_cast<double>(cols));
  for (int i = 0; i < rows * cols; ++i) w[i] = scale * rng.normal();
}
}  // namespace

NetworkParams init_params(Rng& rng, double policy_bias, double log_std) {
  NetworkParams p;
  fill_scaled_normal(p.w1(), kHiddenDim, kObsDim, std::sqrt(2.0), rng);
  fill_scaled_normal(p.w2(), kHiddenDim, kHiddenDim, std::sqrt(2.0), rng);
  fill_scaled_normal(p.wp(), kActionDim, kHiddenDim, 0.01, rng);
  fill_scaled_normal(p.wv(), 1, kHiddenDim, 1.0, rng);
  // A negative policy-head bias starts the untuned controller at low gains
  // (slow but stable); training has to raise them.
  for (int a = 0; a < kActionDim; ++a) {
    p.bp()[a] = policy_bias;
    p.log_std()[a] = log_std;
  }
  return p;
}

ForwardResult forward(const NetworkParams& params,
                      const std::array<double, kObsDim>& obs,
                      ForwardTrace* trace) {
  std::array<double, kHiddenDim> h1;
  std::array<double, kHiddenDim> h2;

  const double* w1 = params.w1();
  const double* b1 = params.b1();
  for (int j = 0; j < kHiddenDim; ++j) {
    double z = b1[j];
    for (int i = 0; i < kObsDim; ++i) z += w1[j * kObsDim + i] * obs[i];
    h1[j] = std::tanh(z);
  }

  const double* w2 = params.w2();
  const double* b2 = params.b2();
  for (int k = 0; k < kHiddenDim; ++k) {
    double z = b2[k];
    for (int j = 0; j < kHiddenDim; ++j) z += w2[k * kHiddenDim + j] * h1[j];
    h2[k] = std::tanh(z);
  }

  ForwardResult out;
  const double* wp = params.wp();
  const double* bp = params.bp();
  for (int a = 0; a < kActionDim; ++a) {
    double z = bp[a];
    for (int k = 0; k < kHiddenDim; ++k) z += wp[a * kHiddenDim + k] * h2[k];
    out.mean[a] = z;
    out.log_std[a] = std::clamp(params.log_std()[a], kLogStdMin, kLogStdMax);
  }

  const double* wv = params.wv();
  double v = params.bv()[0];
  for (int k = 0; k < kHiddenDim; ++k) v += wv[k] * h2[k];
  out.value = v;

  if (trace != nullptr) {
    trace->obs = obs;
    trace->h1 = h1;
    trace->h2 = h2;
  }
  return out;
}

ActionSample sample_action(const std::array<double, kActionDim>& mean,
                           const std::array<double, kActionDim>& log_std,
                           Rng& rng) {
  ActionSample s;
  for (int a = 0; a < kActionDim; ++a) {
    const double sigma = std::exp(log_std[a]);
    s.raw[a] = mean[a] + sigma * rng.normal();
  }
  s.log_prob = log_prob(s.raw, mean, log_std);
  return s;
}

double log_prob(const std::array<double, kActionDim>& raw,
                const std::array<double, kActionDim>& mean,
                const std::array<double, kActionDim>& log_std) {
  double lp = 0.0;
  for (int a = 0; a < kActionDim; ++a) {
    const double sigma = std::exp(log_std[a]);
    const double z = (raw[a] - mean[a]) / sigma;
    lp += -0.5 * z * z - log_std[a] - 0.5 * kLn2Pi;
  }
  return lp;
}

double entropy(const std::array<double, kActionDim>& log_std) {
  double h = 0.0;
  for (int a = 0; a < kActionDim; ++a) {
    h += log_std[a] + 0.5 * (kLn2Pi + 1.0);
  }
  return h;
}

void backward(const NetworkParams& params, const ForwardTrace& trace,
              const HeadGrads& up, std::vector<double>& grad) {
  double* g = grad.data();
  const double* wp = params.wp();
  const double* wv = params.wv();
  const double* w2 = params.w2();

  std::array<double, kHiddenDim> dh2{};
  for (int a = 0; a < kActionDim; ++a) {
    const double dm = up.d_mean[a];
    g[ParamLayout::bp + a] += dm;
    for (int k = 0; k < kHiddenDim; ++k) {
      g[ParamLayout::wp + a * kHiddenDim + k] += dm * trace.h2[k];
      dh2[k] += dm * wp[a * kHiddenDim + k];
    }
    // Clamp gate on the log-std gradient.
    const double raw_ls = params.log_std()[a];
    if (raw_ls > kLogStdMin && raw_ls < kLogStdMax) {
      g[ParamLayout::log_std + a] += up.d_log_std[a];
    }
  }
  g[ParamLayout::bv] += up.d_value;
  for (int k = 0; k < kHiddenDim; ++k) {
    g[ParamLayout::wv + k] += up.d_value * trace.h2[k];
    dh2[k] += up.d_value * wv[k];
  }

  std::array<double, kHiddenDim> dz2;
  for (int k = 0; k < kHiddenDim; ++k) {
    dz2[k] = dh2[k] * (1.0 - trace.h2[k] * trace.h2[k]);
    g[ParamLayout::b2 + k] += dz2[k];
  }
  std::array<double, kHiddenDim> dh1{};
  for (int k = 0; k < kHiddenDim; ++k) {
    const double d = dz2[k];
    for (int j = 0; j < kHiddenDim; ++j) {
      g[ParamLayout::w2 + k * kHiddenDim + j] += d * trace.h1[j];
      dh1[j] += d * w2[k * kHiddenDim + j];
    }
  }
  for (int j = 0; j < kHiddenDim; ++j) {
    const double dz1 = dh1[j] * (1.0 - trace.h1[j] * trace.h1[j]);
    g[ParamLayout::b1 + j] += dz1;
    for (int i = 0; i < kObsDim; ++i) {
      g[ParamLayout::w1 + j * kObsDim + i] += dz1 * trace.obs[i];
    }
  }
}

void adam_step(AdamState& adam, NetworkParams& params,
               const std::vector<double>& grad) {
  adam.step += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, adam.step);
  const double bc2 = 1.0 - std::pow(adam.beta2, adam.step);
  for (int i = 0; i < ParamLayout::total; ++i) {
    adam.m[i] = adam.beta1 * adam.m[i] + (1.0 - adam.beta1) * grad[i];
    adam.v[i] = adam.beta2 * adam.v[i] + (1.0 - adam.beta2) * grad[i] * grad[i];
    const double mhat = adam.m[i] / bc1;
    const double vhat = adam.v[i] / bc2;
    params.data[i] -= adam.lr * mhat / (std::sqrt(vhat) + adam.eps);
  }
}

namespace {
constexpr char kMagic[8] = {'A', 'I', 'R', 'P', 'P', 'O', '1', '\0'};
}

void save_checkpoint(const NetworkParams& params, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(kMagic, sizeof(kMagic));
  const std::uint32_t dims[3] = {kObsDim, kHiddenDim, kActionDim};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  f.write(reinterpret_cast<const char*>(params.data.data()),
          static_cast<std::streamsize>(params.data.size() * sizeof(double)));
}

bool load_checkpoint(NetworkParams& params, const std::string& path,
                     std::string* error) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    if (error) *error = "cannot open checkpoint: " + path;
    return false;
  }
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    if (error) *error = "bad checkpoint magic in " + path;
    return false;
  }
  std::uint32_t dims[3];
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!f || dims[0] != kObsDim || dims[1] != kHiddenDim ||
      dims[2] != kActionDim) {
    if (error) *error = "checkpoint dimension mismatch in " + path;
    return false;
  }
  NetworkParams loaded;
  f.read(reinterpret_cast<char*>(loaded.data.data()),
         static_cast<std::streamsize>(loaded.data.size() * sizeof(double)));
  if (!f) {
    if (error) *error = "truncated checkpoint: " + path;
    return false;
  }
  params = std::move(loaded);
  return true;
}

}  // namespace airpid::nn
