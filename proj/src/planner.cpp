#include "airpid/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace airpid::plan {

VoxelIndex VoxelGrid::voxel_at(const Vec3& p) const {
  const auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
  return {clampi(static_cast<int>(std::floor((p.x - origin.x) / resolution)),
                 dims[0]),
          clampi(static_cast<int>(std::floor((p.y - origin.y) / resolution)),
                 dims[1]),
          clampi(static_cast<int>(std::floor((p.z - origin.z) / resolution)),
                 dims[2])};
}

VoxelGrid build_grid(const ObstacleSet& obstacles, const sim::Box& workspace,
                     double resolution, const Vec3& drone_half_extent) {
  const Vec3 extent = workspace.max - workspace.min;
  if (resolution <= 0.0 || resolution > extent.x || resolution > extent.y ||
      resolution > extent.z) {
    throw std::invalid_argument("voxel resolution does not fit the workspace");
  }
  VoxelGrid grid;
  grid.origin = workspace.min;
  grid.resolution = resolution;
  grid.dims = {static_cast<int>(std::ceil(extent.x / resolution)),
               static_cast<int>(std::ceil(extent.y / resolution)),
               static_cast<int>(std::ceil(extent.z / resolution))};
  grid.blocked.assign(
      static_cast<std::size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2], 0);

  std::vector<sim::Box> inflated;
  inflated.reserve(obstacles.boxes.size());
  for (const auto& b : obstacles.boxes) {
    inflated.push_back(sim::Box{b.min - drone_half_extent,
                                b.max + drone_half_extent});
  }

  for (int k = 0; k < grid.dims[2]; ++k) {
    for (int j = 0; j < grid.dims[1]; ++j) {
      for (int i = 0; i < grid.dims[0]; ++i) {
        const Vec3 c = grid.center({i, j, k});
        bool blocked = !workspace.contains(c);
        for (const auto& b : inflated) {
          if (blocked) break;
          blocked = b.contains(c);
        }
        if (blocked) grid.blocked[grid.flat({i, j, k})] = 1;
      }
    }
  }
  return grid;
}

double heuristic(const VoxelIndex& a, const VoxelIndex& b, EdgeCostMode mode) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  const double euclid = std::sqrt(dx * dx + dy * dy + dz * dz);
  // Under uniform unit edge costs a diagonal move covers sqrt(3) of
  // Euclidean distance per unit cost, so scale down to stay admissible.
  return mode == EdgeCostMode::kEuclidean ? euclid : euclid / std::sqrt(3.0);
}

namespace {

struct QueueEntry {
  double f;
  double h;
  long seq;
  int node;
};

struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.seq > b.seq;
  }
};

std::vector<VoxelIndex> reconstruct_path(const std::vector<int>& came_from,
                                         const VoxelGrid& grid, int current) {
  std::vector<VoxelIndex> chain;
  while (current >= 0) {
    const int x = current % grid.dims[0];
    const int y = (current / grid.dims[0]) % grid.dims[1];
    const int z = current / (grid.dims[0] * grid.dims[1]);
    chain.push_back({x, y, z});
    current = came_from[current];
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace

PlanOutcome a_star(const VoxelIndex& start, const VoxelIndex& goal,
                   const VoxelGrid& grid, EdgeCostMode mode) {
  PlanOutcome out;
  if (grid.is_blocked(start) || grid.is_blocked(goal)) {
    out.error = PlanError::kBadEndpoint;
    return out;
  }

  const std::size_t n = grid.blocked.size();
  std::vector<double> g_score(n, std::numeric_limits<double>::infinity());
  std::vector<int> came_from(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> open;

  const int start_id = grid.flat(start);
  const int goal_id = grid.flat(goal);
  g_score[start_id] = 0.0;
  long seq = 0;
  open.push({heuristic(start, goal, mode), heuristic(start, goal, mode),
             seq++, start_id});
  long expanded = 0;

  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (closed[top.node]) continue;
    closed[top.node] = 1;
    expanded += 1;

    if (top.node == goal_id) {
      PlanResult res;
      res.voxels = reconstruct_path(came_from, grid, top.node);
      res.path.reserve(res.voxels.size());
      for (const auto& v : res.voxels) res.path.push_back(grid.center(v));
      res.cost = g_score[goal_id];
      res.expanded = expanded;
      out.result = std::move(res);
      return out;
    }

    const int cx = top.node % grid.dims[0];
    const int cy = (top.node / grid.dims[0]) % grid.dims[1];
    const int cz = top.node / (grid.dims[0] * grid.dims[1]);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const VoxelIndex nb{cx + dx, cy + dy, cz + dz};
          if (grid.is_blocked(nb)) continue;
          const int nb_id = grid.flat(nb);
          if (closed[nb_id]) continue;
          const double step =
              mode == EdgeCostMode::kEuclidean
                  ? std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz))
                  : 1.0;
          const double tentative = g_score[top.node] + step;
          if (tentative < g_score[nb_id]) {
            g_score[nb_id] = tentative;
            came_from[nb_id] = top.node;
            const double h = heuristic(nb, goal, mode);
            open.push({tentative + h, h, seq++, nb_id});
          }
        }
      }
    }
  }
  out.error = PlanError::kNoPath;
  return out;
}

std::vector<TimedSetpoint> emit_setpoints(const std::vector<Vec3>& path,
                                          double rate_hz) {
  std::vector<TimedSetpoint> schedule;
  schedule.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    schedule.push_back({static_cast<double>(k) / rate_hz, path[k]});
  }
  return schedule;
}

bool load_map(const std::string& path, MapSpec& out, std::string* error) {
  std::ifstream f(path);
  if (!f) {
    if (error) *error = "cannot open map file: " + path;
    return false;
  }
  MapSpec spec;
  bool have_workspace = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    const auto fail = [&](const std::string& what) {
      if (error) {
        *error = path + ": line " + std::to_string(lineno) + ": " + what;
      }
      return false;
    };
    if (tag == "workspace") {
      sim::Box& w = spec.workspace;
      if (!(is >> w.min.x >> w.min.y >> w.min.z >> w.max.x >> w.max.y >>
            w.max.z)) {
        return fail("workspace needs 6 numbers (min xyz, max xyz)");
      }
      have_workspace = true;
    } else if (tag == "resolution") {
      if (!(is >> spec.resolution) || spec.resolution <= 0) {
        return fail("resolution must be a positive number");
      }
    } else if (tag == "half_extent") {
      Vec3& h = spec.drone_half_extent;
      if (!(is >> h.x >> h.y >> h.z)) {
        return fail("half_extent needs 3 numbers");
      }
    } else if (tag == "obstacle") {
      sim::Box b;
      if (!(is >> b.min.x >> b.min.y >> b.min.z >> b.max.x >> b.max.y >>
            b.max.z)) {
        return fail("obstacle needs 6 numbers (min xyz, max xyz)");
      }
      if (b.min.x >= b.max.x || b.min.y >= b.max.y || b.min.z >= b.max.z) {
        return fail("degenerate obstacle box");
      }
      spec.obstacles.boxes.push_back(b);
    } else {
      return fail("unknown directive '" + tag + "'");
    }
  }
  if (!have_workspace) {
    if (error) *error = path + ": missing workspace line";
    return false;
  }
  out = std::move(spec);
  return true;
}

}  // namespace airpid::plan
