#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ssap/distributions.hpp"

namespace ssap::frontier {

using Vec3 = std::array<double, 3>;

enum class CellState : std::uint8_t { Unknown, Free, Occupied };

struct CellIndex {
  int x = 0;
  int y = 0;
  int z = 0;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Dense occupancy grid. `origin` is the outer corner of cell (0, 0, 0);
/// cell centers sit at origin + (index + 0.5) * resolution. Cells are stored
/// x-fastest, then y, then z.
class VoxelGrid {
 public:
  VoxelGrid(double resolution, Vec3 origin, std::array<int, 3> dims,
            CellState fill = CellState::Unknown);

  double resolution() const { return resolution_; }
  const Vec3& origin() const { return origin_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(const CellIndex& c) const;
  CellState at(const CellIndex& c) const { return cells_[linear(c)]; }
  void set(const CellIndex& c, CellState s) { cells_[linear(c)] = s; }
  Vec3 center(const CellIndex& c) const;

  // Text format: header `VGRID1 res ox oy oz nx ny nz`, then nz blocks of
  // ny lines of nx characters from `?` (Unknown), `.` (Free), `#` (Occupied),
  // z = 0 first and y = 0 first within a block. Blank lines are ignored.
  // Throws ParseError naming the offending line.
  static VoxelGrid parse(std::istream& in);
  static VoxelGrid load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

 private:
  std::size_t linear(const CellIndex& c) const;

  double resolution_;
  Vec3 origin_;
  std::array<int, 3> dims_;
  std::vector<CellState> cells_;
};

struct PathTrace {
  std::vector<Vec3> poses;

  // CSV `x,y,z` with a header row. Throws ParseError on an empty path.
  static PathTrace load_csv(const std::filesystem::path& path);
};

struct DecisionPoint {
  Vec3 pose;
  std::int64_t reward = 0;
};

using RewardSequence = std::vector<DecisionPoint>;

// Free cells with at least one face-adjacent Unknown cell; out-of-bounds
// neighbors count as not Unknown. Sorted by (x, y, z).
std::vector<CellIndex> detect_frontiers(const VoxelGrid& grid);

// Keeps cells the ground robot cannot reach: center z > robot_z + 1.0 or
// center z < robot_z - 0.1 (both strict).
std::vector<CellIndex> filter_vertical(std::span<const CellIndex> frontiers, double robot_z,
                                       const VoxelGrid& grid);

// Decision points every `spacing` meters of arc length along the
// piecewise-linear path, starting at the first pose.
std::vector<Vec3> resample_path(const PathTrace& path, double spacing);

// Reward at each decision point: filtered frontier cells whose centers lie
// within `radius` (inclusive) of the point.
RewardSequence rewards_along_path(const VoxelGrid& grid, const PathTrace& path, double spacing = 2.5,
                                  double radius = 10.0);

// `index,x,y,z,reward`, index 1-based.
void write_rewards_csv(const RewardSequence& rewards, std::ostream& out);
RewardSequence load_rewards_csv(const std::filesystem::path& path);

// Histogram of the reward values. Throws InvalidParameter when empty.
EmpiricalPrior prior_from_rewards(const RewardSequence& rewards);

}  // namespace ssap::frontier
