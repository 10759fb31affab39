#ifndef AIRPID_CONFIG_HPP_
#define AIRPID_CONFIG_HPP_

#include <string>

#include "airpid/controller.hpp"
#include "airpid/planner.hpp"
#include "airpid/ppo.hpp"
#include "airpid/sim_env.hpp"

namespace airpid::cfg {

// Every knob of a run in one flat key=value file. Unknown keys are
// rejected; the full set is snapshotted into each run directory.
struct RunConfig {
  sim::SimConfig sim;
  ppo::PpoHyperparams ppo;
  ctrl::GainBounds bounds;
  ctrl::Gains baseline{1.0, 0.02, 0.8};  // fixed-gain comparison controller
  double planner_resolution = 0.25;
  Vec3 drone_half_extent{0.1775, 0.1775, 0.0625};
  std::string planner_mode = "euclidean";  // or "paper-compat"
  double setpoint_rate_hz = 1.0;
  std::uint64_t seed = 7;
  std::string out_dir = "out";
};

// Parses key = value lines ('#' comments, blank lines allowed) on top of
// the defaults. On error returns false and puts a key-level diagnostic in
// *error.
bool parse_config_file(const std::string& path, RunConfig& out,
                       std::string* error);
bool apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value, std::string* error);

// Full snapshot, one key per line, parseable by parse_config_file.
std::string serialize_config(const RunConfig& cfg);
bool write_config_snapshot(const RunConfig& cfg, const std::string& path);

}  // namespace airpid::cfg

#endif  // AIRPID_CONFIG_HPP_
