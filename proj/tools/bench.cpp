// Benchmark: OpenMP kernels against their serial reference paths.

#include <chrono>
#include <cstdio>
#include <vector>

#include "airpid/controller.hpp"
#include "airpid/eval.hpp"
#include "airpid/ppo.hpp"

using namespace airpid;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<ppo::Sample> make_batch(int n, Rng& rng) {
  std::vector<ppo::Sample> batch(n);
  for (auto& s : batch) {
    for (int i = 0; i < nn::kObsDim; ++i) s.obs[i] = rng.uniform(-1, 1);
    for (int i = 0; i < nn::kActionDim; ++i) {
      s.raw_action[i] = rng.normal();
    }
    s.old_log_prob = rng.uniform(-4, -2);
    s.advantage = rng.normal();
    s.value_target = rng.normal();
  }
  return batch;
}

}  // namespace

int main() {
  Rng rng(2024);
  auto params = nn::init_params(rng);
  ppo::PpoHyperparams hp;

  std::printf("%-34s %10s %10s %8s\n", "kernel", "serial(s)", "parallel(s)",
              "speedup");

  for (int batch_size : {256, 1024, 4096, 16384}) {
    const auto batch = make_batch(batch_size, rng);
    std::vector<double> grad;
    const int reps = 200000 / batch_size + 1;

    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
      ppo::ppo_loss_grad_serial(params, batch, hp, grad);
    }
    const double t_serial = seconds_since(t0) / reps;

    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
      ppo::ppo_loss_grad(params, batch, hp, grad);
    }
    const double t_parallel = seconds_since(t0) / reps;

    char label[64];
    std::snprintf(label, sizeof(label), "ppo_loss_grad batch=%d", batch_size);
    std::printf("%-34s %10.6f %10.6f %7.2fx\n", label, t_serial, t_parallel,
                t_serial / t_parallel);
  }

  {
    sim::SimConfig cfg;
    ctrl::GainBounds bounds;
    ctrl::ControllerMode mode = ctrl::FixedPid{ctrl::Gains{1.5, 0.02, 0.8}};
    const int episodes = 16;

    auto t0 = std::chrono::steady_clock::now();
    eval::run_episodes_serial(mode, bounds, cfg, 99, episodes);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    eval::run_episodes(mode, bounds, cfg, 99, episodes);
    const double t_parallel = seconds_since(t0);

    char label[64];
    std::snprintf(label, sizeof(label), "run_episodes n=%d", episodes);
    std::printf("%-34s %10.6f %10.6f %7.2fx\n", label, t_serial, t_parallel,
                t_serial / t_parallel);
  }
  return 0;
}
