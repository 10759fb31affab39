#ifndef AIRPID_PLANNER_HPP_
#define AIRPID_PLANNER_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "airpid/sim_env.hpp"
#include "airpid/vec3.hpp"

namespace airpid::plan {

using VoxelIndex = std::array<int, 3>;

struct VoxelGrid {
  Vec3 origin;             // workspace min corner
  double resolution = 0.25;
  VoxelIndex dims{};
  std::vector<std::uint8_t> blocked;  // dims[0]*dims[1]*dims[2]

  int flat(const VoxelIndex& v) const {
    return (v[2] * dims[1] + v[1]) * dims[0] + v[0];
  }
  bool in_range(const VoxelIndex& v) const {
    return v[0] >= 0 && v[0] < dims[0] && v[1] >= 0 && v[1] < dims[1] &&
           v[2] >= 0 && v[2] < dims[2];
  }
  bool is_blocked(const VoxelIndex& v) const {
    return !in_range(v) || blocked[flat(v)] != 0;
  }
  Vec3 center(const VoxelIndex& v) const {
    return {origin.x + (v[0] + 0.5) * resolution,
            origin.y + (v[1] + 0.5) * resolution,
            origin.z + (v[2] + 0.5) * resolution};
  }
  // Voxel whose cell contains the point (clamped to the grid).
  VoxelIndex voxel_at(const Vec3& p) const;
};

struct ObstacleSet {
  std::vector<sim::Box> boxes;
};

enum class EdgeCostMode {
  kEuclidean,    // step length 1, sqrt(2), sqrt(3) in voxel units
  kPaperCompat,  // uniform cost 1 per move, heuristic scaled by 1/sqrt(3)
};

// Obstacles are inflated by the drone's half extents (Minkowski sum), so
// the planner can treat the vehicle as a point. Voxel centers outside the
// workspace are blocked.
VoxelGrid build_grid(const ObstacleSet& obstacles, const sim::Box& workspace,
                     double resolution, const Vec3& drone_half_extent);

double heuristic(const VoxelIndex& a, const VoxelIndex& b, EdgeCostMode mode);

struct PlanResult {
  std::vector<Vec3> path;  // voxel centers, start..goal
  std::vector<VoxelIndex> voxels;
  double cost = 0.0;
  long expanded = 0;
};

enum class PlanError { kBadEndpoint, kNoPath };

struct PlanOutcome {
  std::optional<PlanResult> result;
  PlanError error = PlanError::kNoPath;
  bool ok() const { return result.has_value(); }
};

// 26-connected A* with deterministic tie-breaking (min f, then min h,
// then insertion order).
PlanOutcome a_star(const VoxelIndex& start, const VoxelIndex& goal,
                   const VoxelGrid& grid, EdgeCostMode mode);

struct TimedSetpoint {
  double t = 0.0;
  Vec3 point;
};

std::vector<TimedSetpoint> emit_setpoints(const std::vector<Vec3>& path,
                                          double rate_hz);

struct MapSpec {
  sim::Box workspace;
  double resolution = 0.25;
  Vec3 drone_half_extent{0.1775, 0.1775, 0.0625};
  ObstacleSet obstacles;
};

// Structured-text map file: "workspace", "resolution", "half_extent" and
// repeated "obstacle" lines with min/max corners in meters.
bool load_map(const std::string& path, MapSpec& out, std::string* error);

}  // namespace airpid::plan

#endif  // AIRPID_PLANNER_HPP_
