// airpid: train, evaluate and compare the adaptive PID controller, plan
// paths over voxel maps and render CSV logs as SVG charts.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airpid/config.hpp"
#include "airpid/csv.hpp"
#include "airpid/eval.hpp"
#include "airpid/metrics.hpp"
#include "airpid/network.hpp"
#include "airpid/planner.hpp"
#include "airpid/ppo.hpp"
#include "airpid/svg_plot.hpp"

namespace {

using namespace airpid;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoPath = 3;
constexpr int kExitCorrupt = 4;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

// Precedence: defaults < config file < AIRPID_OUT < explicit flags.
int resolve_config(const CommonOpts& opts, cfg::RunConfig& run) {
  if (!opts.config_path.empty()) {
    std::string err;
    if (!cfg::parse_config_file(opts.config_path, run, &err)) {
      std::cerr << "config error: " << err << "\n";
      return kExitConfig;
    }
  }
  if (const char* env_out = std::getenv("AIRPID_OUT");
      env_out != nullptr && *env_out != '\0') {
    run.out_dir = env_out;
  }
  if (!opts.out_dir.empty()) run.out_dir = opts.out_dir;
  if (opts.seed) run.seed = *opts.seed;
  run.ppo.seed = run.seed;
  run.sim.seed = run.seed;
  if (!run.sim.valid() || !run.ppo.valid()) {
    std::cerr << "config error: invalid sim/ppo parameter combination\n";
    return kExitConfig;
  }
  return kExitOk;
}

int load_params_or_exit(const std::string& path, nn::NetworkParams& params) {
  std::string err;
  if (!nn::load_checkpoint(params, path, &err)) {
    std::cerr << "checkpoint error: " << err << "\n";
    return kExitCorrupt;
  }
  return kExitOk;
}

struct EvalArtifacts {
  std::vector<metrics::LegMetrics> legs;
  int reached = 0;
  int counted = 0;
};

EvalArtifacts summarize(const std::vector<eval::EpisodeResult>& episodes) {
  EvalArtifacts a;
  for (const auto& ep : episodes) {
    for (const auto& m : ep.leg_metrics) {
      a.legs.push_back(m);
      if (m.censored) continue;
      a.counted += 1;
      if (m.completed) a.reached += 1;
    }
  }
  return a;
}

void write_eval_outputs(const std::string& out_dir,
                        const std::vector<eval::EpisodeResult>& episodes,
                        const sim::SimConfig& sim_cfg,
                        const std::string& prefix) {
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/%s_trajectory_%03zu.csv",
                  prefix.c_str(), i);
    eval::write_trajectory_csv(out_dir + name, episodes[i].rows);
    std::snprintf(name, sizeof(name), "/%s_legs_%03zu.csv", prefix.c_str(),
                  i);
    eval::write_legs_csv(out_dir + name, episodes[i].legs,
                         episodes[i].leg_metrics, sim_cfg);
  }
}

void write_metrics_summary(const std::string& path,
                           const std::vector<std::string>& controllers,
                           const std::vector<EvalArtifacts>& artifacts) {
  io::CsvWriter w(path, "airpid.metrics-summary.v1",
                  {"controller", "legs", "median_effective_speed",
                   "median_settling_time_s", "median_overshoot_m",
                   "success_rate"});
  for (std::size_t i = 0; i < controllers.size(); ++i) {
    const auto& a = artifacts[i];
    std::vector<double> speeds, settlings, overshoots;
    for (const auto& m : a.legs) {
      if (m.censored) continue;
      speeds.push_back(m.effective_speed);
      if (m.settling_time) settlings.push_back(*m.settling_time);
      if (m.overshoot) overshoots.push_back(*m.overshoot);
    }
    const double rate =
        a.counted > 0 ? static_cast<double>(a.reached) / a.counted : 0.0;
    w.row({controllers[i], std::to_string(a.counted),
           io::fmt_double(metrics::median(speeds)),
           io::fmt_double(metrics::median(settlings)),
           io::fmt_double(metrics::median(overshoots)),
           io::fmt_double(rate)});
  }
}

int cmd_train(const CommonOpts& opts, std::optional<long> total_override) {
  cfg::RunConfig run;
  if (int rc = resolve_config(opts, run); rc != kExitOk) return rc;
  if (total_override) run.ppo.total_timesteps = *total_override;
  if (!run.ppo.valid()) {
    std::cerr << "config error: invalid total timesteps\n";
    return kExitConfig;
  }

  std::filesystem::create_directories(run.out_dir);
  if (!cfg::write_config_snapshot(run, run.out_dir + "/config.snapshot")) {
    std::cerr << "cannot write config snapshot in " << run.out_dir << "\n";
    return kExitOther;
  }

  try {
    const auto result = ppo::train(run.sim, run.ppo, run.bounds, run.out_dir);
    const auto& last = result.report.iterations.back();
    std::cout << "train: seed=" << run.seed << " iterations="
              << last.iteration << " timesteps=" << last.timestep
              << " mean_reward_raw=" << io::fmt_double(last.mean_reward_raw)
              << " mean_leg_effective_speed="
              << io::fmt_double(last.mean_leg_effective_speed)
              << " checkpoint=" << run.out_dir << "/checkpoint_final.bin\n";
  } catch (const std::exception& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOk;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint,
             const std::string& mode, int episodes) {
  cfg::RunConfig run;
  if (int rc = resolve_config(opts, run); rc != kExitOk) return rc;
  if (episodes < 1) {
    std::cerr << "config error: --episodes must be >= 1\n";
    return kExitConfig;
  }

  nn::NetworkParams params;
  ctrl::ControllerMode controller = ctrl::FixedPid{run.baseline};
  ctrl::Gains frozen_gains;
  if (mode == "adaptive" || mode == "frozen") {
    if (checkpoint.empty()) {
      std::cerr << "config error: --mode " << mode
                << " requires a checkpoint\n";
      return kExitConfig;
    }
    if (int rc = load_params_or_exit(checkpoint, params); rc != kExitOk) {
      return rc;
    }
    if (mode == "adaptive") {
      controller = ctrl::AdaptivePolicy{&params};
    } else {
      const auto probe = eval::steady_state_probe(
          params, run.bounds, run.sim, derive_seed(run.seed, 1000));
      frozen_gains = ctrl::extract_steady_gains(params, probe, run.bounds);
      controller = ctrl::FrozenSteadyState{frozen_gains};
    }
  } else if (mode != "fixed") {
    std::cerr << "config error: unknown --mode '" << mode << "'\n";
    return kExitConfig;
  }

  std::filesystem::create_directories(run.out_dir);
  cfg::write_config_snapshot(run, run.out_dir + "/config.snapshot");

  const auto results =
      eval::run_episodes(controller, run.bounds, run.sim, run.seed, episodes);
  write_eval_outputs(run.out_dir, results, run.sim, mode);
  const auto art = summarize(results);
  write_metrics_summary(run.out_dir + "/metrics_summary.csv", {mode}, {art});

  std::vector<double> speeds;
  for (const auto& m : art.legs) {
    if (!m.censored) speeds.push_back(m.effective_speed);
  }
  std::cout << "eval: mode=" << mode << " episodes=" << episodes
            << " legs=" << art.counted << " median_effective_speed="
            << io::fmt_double(metrics::median(speeds)) << " success_rate="
            << io::fmt_double(art.counted > 0
                                  ? static_cast<double>(art.reached) /
                                        art.counted
                                  : 0.0);
  if (mode == "frozen") {
    std::cout << " frozen_gains=(" << io::fmt_double(frozen_gains.kp) << ","
              << io::fmt_double(frozen_gains.ki) << ","
              << io::fmt_double(frozen_gains.kd) << ")";
  }
  std::cout << "\n";
  return kExitOk;
}

int cmd_compare(const CommonOpts& opts, const std::string& checkpoint,
                int episodes) {
  cfg::RunConfig run;
  if (int rc = resolve_config(opts, run); rc != kExitOk) return rc;

  nn::NetworkParams params;
  if (int rc = load_params_or_exit(checkpoint, params); rc != kExitOk) {
    return rc;
  }
  const auto probe = eval::steady_state_probe(params, run.bounds, run.sim,
                                              derive_seed(run.seed, 1000));
  const ctrl::Gains frozen_gains =
      ctrl::extract_steady_gains(params, probe, run.bounds);

  std::filesystem::create_directories(run.out_dir);
  cfg::write_config_snapshot(run, run.out_dir + "/config.snapshot");

  const std::vector<std::string> names = {"adaptive", "frozen", "fixed"};
  const std::vector<ctrl::ControllerMode> modes = {
      ctrl::AdaptivePolicy{&params}, ctrl::FrozenSteadyState{frozen_gains},
      ctrl::FixedPid{run.baseline}};

  std::vector<EvalArtifacts> artifacts;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    // Same master seed for every controller: identical target sequences.
    const auto results = eval::run_episodes(modes[i], run.bounds, run.sim,
                                            run.seed, episodes);
    write_eval_outputs(run.out_dir, results, run.sim, names[i]);
    artifacts.push_back(summarize(results));
  }
  write_metrics_summary(run.out_dir + "/metrics_summary.csv", names,
                        artifacts);

  const auto vs_frozen =
      metrics::improvement_report(artifacts[0].legs, artifacts[1].legs);
  const auto vs_fixed =
      metrics::improvement_report(artifacts[0].legs, artifacts[2].legs);

  io::CsvWriter w(run.out_dir + "/improvement.csv", "airpid.improvement.v1",
                  {"baseline", "speed_pct", "settling_pct", "overshoot_pct",
                   "adaptive_median_speed", "baseline_median_speed",
                   "adaptive_median_settling", "baseline_median_settling",
                   "adaptive_failure_rate", "baseline_failure_rate"});
  const auto emit = [&w](const std::string& name,
                         const metrics::ImprovementReport& r) {
    w.row({name, io::fmt_double(r.speed_pct), io::fmt_double(r.settling_pct),
           io::fmt_double(r.overshoot_pct),
           io::fmt_double(r.adaptive_median_speed),
           io::fmt_double(r.baseline_median_speed),
           io::fmt_double(r.adaptive_median_settling),
           io::fmt_double(r.baseline_median_settling),
           io::fmt_double(r.adaptive_failure_rate),
           io::fmt_double(r.baseline_failure_rate)});
  };
  emit("frozen", vs_frozen);
  emit("fixed", vs_fixed);

  std::cout << "compare: adaptive vs frozen: speed "
            << io::fmt_double(vs_frozen.speed_pct) << "%, settling "
            << io::fmt_double(vs_frozen.settling_pct) << "%, overshoot "
            << io::fmt_double(vs_frozen.overshoot_pct) << "%\n";
  std::cout << "compare: adaptive vs fixed:  speed "
            << io::fmt_double(vs_fixed.speed_pct) << "%, settling "
            << io::fmt_double(vs_fixed.settling_pct) << "%, overshoot "
            << io::fmt_double(vs_fixed.overshoot_pct) << "%\n";
  std::cout << "compare: frozen_gains=(" << io::fmt_double(frozen_gains.kp)
            << "," << io::fmt_double(frozen_gains.ki) << ","
            << io::fmt_double(frozen_gains.kd) << ")\n";
  return kExitOk;
}

bool parse_vec3(const std::string& s, Vec3& out) {
  return std::sscanf(s.c_str(), "%lf,%lf,%lf", &out.x, &out.y, &out.z) == 3;
}

int cmd_plan(const CommonOpts& opts, const std::string& map_path,
             const std::string& start_s, const std::string& goal_s,
             const std::string& mode_s, double rate_hz, bool simulate,
             const std::string& checkpoint) {
  cfg::RunConfig run;
  if (int rc = resolve_config(opts, run); rc != kExitOk) return rc;

  plan::MapSpec map;
  std::string err;
  if (!plan::load_map(map_path, map, &err)) {
    std::cerr << "map error: " << err << "\n";
    return kExitConfig;
  }
  Vec3 start, goal;
  if (!parse_vec3(start_s, start) || !parse_vec3(goal_s, goal)) {
    std::cerr << "config error: --start/--goal must be x,y,z\n";
    return kExitConfig;
  }
  const auto mode = mode_s == "paper-compat" ? plan::EdgeCostMode::kPaperCompat
                                             : plan::EdgeCostMode::kEuclidean;
  if (mode_s != "euclidean" && mode_s != "paper-compat") {
    std::cerr << "config error: --mode must be euclidean or paper-compat\n";
    return kExitConfig;
  }
  if (rate_hz <= 0) {
    std::cerr << "config error: --rate must be positive\n";
    return kExitConfig;
  }

  plan::VoxelGrid grid;
  try {
    grid = plan::build_grid(map.obstacles, map.workspace, map.resolution,
                            map.drone_half_extent);
  } catch (const std::exception& e) {
    std::cerr << "map error: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto outcome =
      plan::a_star(grid.voxel_at(start), grid.voxel_at(goal), grid, mode);
  if (!outcome.ok()) {
    if (outcome.error == plan::PlanError::kBadEndpoint) {
      std::cerr << "plan error: start or goal voxel is blocked\n";
      return kExitConfig;
    }
    std::cerr << "plan error: no path between start and goal\n";
    return kExitNoPath;
  }
  const auto& result = *outcome.result;
  const auto schedule = plan::emit_setpoints(result.path, rate_hz);

  std::filesystem::create_directories(run.out_dir);
  {
    io::CsvWriter w(run.out_dir + "/path.csv", "airpid.path.v1",
                    {"t", "x", "y", "z"});
    for (const auto& sp : schedule) {
      w.row({io::fmt_double(sp.t), io::fmt_double(sp.point.x),
             io::fmt_double(sp.point.y), io::fmt_double(sp.point.z)});
    }
  }
  std::cout << "plan: waypoints=" << result.path.size() << " cost="
            << io::fmt_double(result.cost) << " expanded=" << result.expanded
            << " -> " << run.out_dir << "/path.csv\n";

  if (!simulate) return kExitOk;

  // Follow the schedule with the chosen controller: targets switch on the
  // setpoint clock, dynamics run at the control rate.
  nn::NetworkParams params;
  ctrl::ControllerMode controller = ctrl::FixedPid{run.baseline};
  if (!checkpoint.empty()) {
    if (int rc = load_params_or_exit(checkpoint, params); rc != kExitOk) {
      return rc;
    }
    controller = ctrl::AdaptivePolicy{&params};
  }

  const sim::SimConfig& sc = run.sim;
  Vec3 position = schedule.front().point;
  Vec3 velocity{};
  double integral = 0.0, prev_pe = 0.0;
  bool leg_first = true;
  std::size_t wp = 0;
  const double t_end = schedule.back().t + 5.0;  // settle margin at the goal
  std::vector<eval::TrajRow> rows;
  double max_switch_err = 0.0;

  for (double t = 0.0; t < t_end; t += sc.dt) {
    while (wp + 1 < schedule.size() && schedule[wp + 1].t <= t) {
      max_switch_err = std::max(
          max_switch_err, sim::position_error(schedule[wp].point, position));
      ++wp;
      integral = 0.0;
      leg_first = true;
    }
    const Vec3 target = schedule[wp].point;
    sim::ErrorSignal e;
    e.pe = sim::position_error(target, position);
    e.dpe = leg_first ? 0.0 : (e.pe - prev_pe) / sc.dt;
    integral += e.pe * sc.dt;
    e.ipe = integral;
    prev_pe = e.pe;
    leg_first = false;

    const auto action =
        ctrl::act(controller, e, run.bounds, target, position, nullptr, true);
    velocity += sc.dt * (1.0 / sc.tau_v) * ((action.v_cmd + sc.wind) - velocity);
    position += sc.dt * velocity;

    eval::TrajRow row;
    row.t = t + sc.dt;
    row.position = position;
    row.velocity = velocity;
    row.gains = action.gains;
    row.command = action.v_cmd;
    row.pe = sim::position_error(target, position);
    row.leg_id = static_cast<int>(wp);
    rows.push_back(row);
  }
  eval::write_trajectory_csv(run.out_dir + "/plan_tracking.csv", rows);
  const double final_err =
      sim::position_error(schedule.back().point, position);
  std::cout << "plan: simulated tracking, final_error="
            << io::fmt_double(final_err) << " max_switch_error="
            << io::fmt_double(max_switch_err) << " -> " << run.out_dir
            << "/plan_tracking.csv\n";
  return kExitOk;
}

int cmd_plot(const std::string& csv_in, const std::string& kind,
             const std::string& svg_out) {
  std::string err;
  if (!svg::plot_csv(csv_in, kind, svg_out, &err)) {
    std::cerr << "plot error: " << err << "\n";
    return kExitConfig;
  }
  std::cout << "plot: " << csv_in << " (" << kind << ") -> " << svg_out
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive PID drone controller workbench"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::optional<long> total_override;

  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "key=value config file");
    sub->add_option("--seed", opts.seed, "master seed");
    sub->add_option("--out", opts.out_dir, "output directory");
  };

  auto* train = app.add_subcommand("train", "run PPO training");
  add_common(train);
  train->add_option("--total-timesteps", total_override,
                    "override the training budget");

  std::string checkpoint, mode = "adaptive";
  int episodes = 20;
  auto* ev = app.add_subcommand("eval", "evaluate a controller");
  add_common(ev);
  ev->add_option("--checkpoint", checkpoint, "policy checkpoint");
  ev->add_option("--mode", mode, "adaptive|fixed|frozen");
  ev->add_option("--episodes", episodes, "number of evaluation episodes");

  auto* cmp = app.add_subcommand(
      "compare", "adaptive vs frozen-gain vs fixed-gain comparison");
  add_common(cmp);
  cmp->add_option("--checkpoint", checkpoint, "policy checkpoint")
      ->required();
  cmp->add_option("--episodes", episodes, "number of evaluation episodes");

  std::string map_path, start_s = "0,0,1", goal_s = "1,1,1";
  std::string plan_mode = "euclidean";
  double rate_hz = 1.0;
  bool simulate = false;
  auto* pl = app.add_subcommand("plan", "A* path planning over a voxel map");
  add_common(pl);
  pl->add_option("map", map_path, "obstacle map file")->required();
  pl->add_option("--start", start_s, "start point x,y,z (meters)");
  pl->add_option("--goal", goal_s, "goal point x,y,z (meters)");
  pl->add_option("--mode", plan_mode, "euclidean|paper-compat");
  pl->add_option("--rate", rate_hz, "setpoint emission rate, Hz");
  pl->add_flag("--simulate", simulate, "track the schedule in simulation");
  pl->add_option("--checkpoint", checkpoint,
                 "adaptive policy for --simulate (default: fixed gains)");

  std::string csv_in, plot_kind = "training", svg_out;
  auto* plot = app.add_subcommand("plot", "render a CSV log as an SVG chart");
  plot->add_option("csv", csv_in, "input CSV")->required();
  plot->add_option("--kind", plot_kind, "training|trajectory|gains");
  plot->add_option("svg", svg_out, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(opts, total_override);
    if (ev->parsed()) return cmd_eval(opts, checkpoint, mode, episodes);
    if (cmp->parsed()) return cmd_compare(opts, checkpoint, episodes);
    if (pl->parsed()) {
      return cmd_plan(opts, map_path, start_s, goal_s, plan_mode, rate_hz,
                      simulate, checkpoint);
    }
    if (plot->parsed()) return cmd_plot(csv_in, plot_kind, svg_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
