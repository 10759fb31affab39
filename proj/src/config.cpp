#include "airpid/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "airpid/csv.hpp"

namespace airpid::cfg {

namespace {

struct Binding {
  std::function<std::string(const RunConfig&)> get;
  std::function<bool(RunConfig&, const std::string&)> set;
};

bool set_double(double& field, const std::string& v) {
  try {
    field = io::parse_double(v);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

bool set_int(int& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    field = std::stoi(v, &pos);
    return pos == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool set_long(long& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    field = std::stol(v, &pos);
    return pos == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool set_u64(std::uint64_t& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    field = std::stoull(v, &pos);
    return pos == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> kBindings = [] {
    std::map<std::string, Binding> b;
    const auto dbl = [&b](const std::string& key,
                          std::function<double&(RunConfig&)> ref) {
      b[key] = Binding{
          [ref](const RunConfig& c) {
            return io::fmt_double(ref(const_cast<RunConfig&>(c)));
          },
          [ref](RunConfig& c, const std::string& v) {
            return set_double(ref(c), v);
          }};
    };
    const auto integer = [&b](const std::string& key,
                              std::function<int&(RunConfig&)> ref) {
      b[key] = Binding{
          [ref](const RunConfig& c) {
            return std::to_string(ref(const_cast<RunConfig&>(c)));
          },
          [ref](RunConfig& c, const std::string& v) {
            return set_int(ref(c), v);
          }};
    };

    dbl("sim.dt", [](RunConfig& c) -> double& { return c.sim.dt; });
    dbl("sim.tau_v", [](RunConfig& c) -> double& { return c.sim.tau_v; });
    dbl("sim.workspace.min_x",
        [](RunConfig& c) -> double& { return c.sim.workspace.min.x; });
    dbl("sim.workspace.min_y",
        [](RunConfig& c) -> double& { return c.sim.workspace.min.y; });
    dbl("sim.workspace.min_z",
        [](RunConfig& c) -> double& { return c.sim.workspace.min.z; });
    dbl("sim.workspace.max_x",
        [](RunConfig& c) -> double& { return c.sim.workspace.max.x; });
    dbl("sim.workspace.max_y",
        [](RunConfig& c) -> double& { return c.sim.workspace.max.y; });
    dbl("sim.workspace.max_z",
        [](RunConfig& c) -> double& { return c.sim.workspace.max.z; });
    dbl("sim.settle_tolerance",
        [](RunConfig& c) -> double& { return c.sim.settle_tolerance; });
    integer("sim.hold_steps",
            [](RunConfig& c) -> int& { return c.sim.hold_steps; });
    integer("sim.episode_cap",
            [](RunConfig& c) -> int& { return c.sim.episode_cap; });
    integer("sim.censor_steps",
            [](RunConfig& c) -> int& { return c.sim.censor_steps; });
    dbl("sim.wind.x", [](RunConfig& c) -> double& { return c.sim.wind.x; });
    dbl("sim.wind.y", [](RunConfig& c) -> double& { return c.sim.wind.y; });
    dbl("sim.wind.z", [](RunConfig& c) -> double& { return c.sim.wind.z; });
    dbl("sim.step_penalty",
        [](RunConfig& c) -> double& { return c.sim.step_penalty; });
    dbl("sim.reward_exp_cap",
        [](RunConfig& c) -> double& { return c.sim.reward_exp_cap; });
    dbl("sim.fault_penalty",
        [](RunConfig& c) -> double& { return c.sim.fault_penalty; });
    dbl("sim.command_limit",
        [](RunConfig& c) -> double& { return c.sim.command_limit; });

    dbl("ppo.clip_epsilon",
        [](RunConfig& c) -> double& { return c.ppo.clip_epsilon; });
    dbl("ppo.gamma", [](RunConfig& c) -> double& { return c.ppo.gamma; });
    dbl("ppo.gae_lambda",
        [](RunConfig& c) -> double& { return c.ppo.gae_lambda; });
    dbl("ppo.c1", [](RunConfig& c) -> double& { return c.ppo.c1; });
    dbl("ppo.c2", [](RunConfig& c) -> double& { return c.ppo.c2; });
    integer("ppo.horizon",
            [](RunConfig& c) -> int& { return c.ppo.horizon; });
    integer("ppo.epochs", [](RunConfig& c) -> int& { return c.ppo.epochs; });
    integer("ppo.minibatch",
            [](RunConfig& c) -> int& { return c.ppo.minibatch; });
    b["ppo.total_timesteps"] = Binding{
        [](const RunConfig& c) { return std::to_string(c.ppo.total_timesteps); },
        [](RunConfig& c, const std::string& v) {
          return set_long(c.ppo.total_timesteps, v);
        }};
    dbl("ppo.lr", [](RunConfig& c) -> double& { return c.ppo.lr; });
    dbl("ppo.reward_scale",
        [](RunConfig& c) -> double& { return c.ppo.reward_scale; });
    dbl("ppo.policy_bias_init",
        [](RunConfig& c) -> double& { return c.ppo.policy_bias_init; });
    dbl("ppo.log_std_init",
        [](RunConfig& c) -> double& { return c.ppo.log_std_init; });

    dbl("gains.kp_max",
        [](RunConfig& c) -> double& { return c.bounds.kp_max; });
    dbl("gains.ki_max",
        [](RunConfig& c) -> double& { return c.bounds.ki_max; });
    dbl("gains.kd_max",
        [](RunConfig& c) -> double& { return c.bounds.kd_max; });
    dbl("baseline.kp", [](RunConfig& c) -> double& { return c.baseline.kp; });
    dbl("baseline.ki", [](RunConfig& c) -> double& { return c.baseline.ki; });
    dbl("baseline.kd", [](RunConfig& c) -> double& { return c.baseline.kd; });

    dbl("planner.resolution",
        [](RunConfig& c) -> double& { return c.planner_resolution; });
    dbl("planner.half_extent.x",
        [](RunConfig& c) -> double& { return c.drone_half_extent.x; });
    dbl("planner.half_extent.y",
        [](RunConfig& c) -> double& { return c.drone_half_extent.y; });
    dbl("planner.half_extent.z",
        [](RunConfig& c) -> double& { return c.drone_half_extent.z; });
    b["planner.mode"] = Binding{
        [](const RunConfig& c) { return c.planner_mode; },
        [](RunConfig& c, const std::string& v) {
          if (v != "euclidean" && v != "paper-compat") return false;
          c.planner_mode = v;
          return true;
        }};
    dbl("planner.rate_hz",
        [](RunConfig& c) -> double& { return c.setpoint_rate_hz; });

    b["seed"] = Binding{
        [](const RunConfig& c) { return std::to_string(c.seed); },
        [](RunConfig& c, const std::string& v) { return set_u64(c.seed, v); }};
    b["out_dir"] = Binding{
        [](const RunConfig& c) { return c.out_dir; },
        [](RunConfig& c, const std::string& v) {
          c.out_dir = v;
          return true;
        }};
    return b;
  }();
  return kBindings;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

bool apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value, std::string* error) {
  const auto& b = bindings();
  const auto it = b.find(key);
  if (it == b.end()) {
    if (error) *error = "unknown config key '" + key + "'";
    return false;
  }
  if (!it->second.set(cfg, value)) {
    if (error) *error = "invalid value '" + value + "' for key '" + key + "'";
    return false;
  }
  return true;
}

bool parse_config_file(const std::string& path, RunConfig& out,
                       std::string* error) {
  std::ifstream f(path);
  if (!f) {
    if (error) *error = "cannot open config file: " + path;
    return false;
  }
  RunConfig cfg = out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      if (error) {
        *error = path + ": line " + std::to_string(lineno) +
                 ": expected 'key = value'";
      }
      return false;
    }
    std::string key_err;
    if (!apply_key(cfg, trim(stripped.substr(0, eq)),
                   trim(stripped.substr(eq + 1)), &key_err)) {
      if (error) {
        *error = path + ": line " + std::to_string(lineno) + ": " + key_err;
      }
      return false;
    }
  }
  out = cfg;
  return true;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, binding] : bindings()) {
    os << key << " = " << binding.get(cfg) << "\n";
  }
  return os.str();
}

bool write_config_snapshot(const RunConfig& cfg, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) return false;
  f << serialize_config(cfg);
  return f.good();
}

}  // namespace airpid::cfg
