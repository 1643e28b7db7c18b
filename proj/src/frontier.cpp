#include "ssap/frontier.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "ssap/csv.hpp"
#include "ssap/errors.hpp"

namespace ssap::frontier {

namespace {

constexpr std::array<std::array<int, 3>, 6> kFaceNeighbors = {{
    {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1},
}};

char state_char(CellState s) {
  switch (s) {
    case CellState::Unknown: return '?';
    case CellState::Free: return '.';
    default: return '#';
  }
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

VoxelGrid::VoxelGrid(double resolution, Vec3 origin, std::array<int, 3> dims, CellState fill)
    : resolution_(resolution), origin_(origin), dims_(dims) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw InvalidParameter("grid: resolution must be > 0");
  for (const int d : dims) {
    if (d <= 0) throw InvalidParameter("grid: dimensions must be positive");
  }
  cells_.assign(static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
                    static_cast<std::size_t>(dims[2]),
                fill);
}

bool VoxelGrid::in_bounds(const CellIndex& c) const {
  return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims_[0] && c.y < dims_[1] && c.z < dims_[2];
}

std::size_t VoxelGrid::linear(const CellIndex& c) const {
  if (!in_bounds(c)) throw std::out_of_range("grid: cell index out of bounds");
  return static_cast<std::size_t>(c.x) +
         static_cast<std::size_t>(dims_[0]) *
             (static_cast<std::size_t>(c.y) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(c.z));
}

Vec3 VoxelGrid::center(const CellIndex& c) const {
  return {origin_[0] + (c.x + 0.5) * resolution_, origin_[1] + (c.y + 0.5) * resolution_,
          origin_[2] + (c.z + 0.5) * resolution_};
}

VoxelGrid VoxelGrid::parse(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_content_line()) throw ParseError(1, "grid: missing header");
  std::istringstream header(line);
  std::string magic;
  double res = 0.0;
  Vec3 origin{};
  std::array<long long, 3> dims{};
  header >> magic >> res >> origin[0] >> origin[1] >> origin[2] >> dims[0] >> dims[1] >> dims[2];
  std::string trailing;
  if (magic != "VGRID1" || header.fail() || (header >> trailing)) {
    throw ParseError(line_no, "grid: malformed header, expected 'VGRID1 res ox oy oz nx ny nz'");
  }
  if (!(res > 0.0) || dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 || dims[0] > 100000 ||
      dims[1] > 100000 || dims[2] > 100000) {
    throw ParseError(line_no, "grid: resolution and dimensions must be positive");
  }

  VoxelGrid grid(res, origin, {static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2])});
  for (int z = 0; z < grid.dims_[2]; ++z) {
    for (int y = 0; y < grid.dims_[1]; ++y) {
      if (!next_content_line()) {
        throw ParseError(line_no + 1, "grid: expected row y=" + std::to_string(y) + " of z=" + std::to_string(z));
      }
      if (line.size() != static_cast<std::size_t>(grid.dims_[0])) {
        throw ParseError(line_no, "grid: row has " + std::to_string(line.size()) + " cells, expected " +
                                      std::to_string(grid.dims_[0]));
      }
      for (int x = 0; x < grid.dims_[0]; ++x) {
        CellState s;
        switch (line[static_cast<std::size_t>(x)]) {
          case '?': s = CellState::Unknown; break;
          case '.': s = CellState::Free; break;
          case '#': s = CellState::Occupied; break;
          default:
            throw ParseError(line_no, std::string("grid: invalid cell character '") +
                                          line[static_cast<std::size_t>(x)] + "'");
        }
        grid.set({x, y, z}, s);
      }
    }
  }
  if (next_content_line()) throw ParseError(line_no, "grid: unexpected data after the last block");
  return grid;
}

VoxelGrid VoxelGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return parse(in);
}

void VoxelGrid::write(std::ostream& out) const {
  out << "VGRID1 " << csv::format_double(resolution_) << ' ' << csv::format_double(origin_[0]) << ' '
      << csv::format_double(origin_[1]) << ' ' << csv::format_double(origin_[2]) << ' ' << dims_[0] << ' '
      << dims_[1] << ' ' << dims_[2] << '\n';
  for (int z = 0; z < dims_[2]; ++z) {
    if (z > 0) out << '\n';
    for (int y = 0; y < dims_[1]; ++y) {
      for (int x = 0; x < dims_[0]; ++x) out << state_char(at({x, y, z}));
      out << '\n';
    }
  }
}

PathTrace PathTrace::load_csv(const std::filesystem::path& path) {
  PathTrace trace;
  for (const auto& row : csv::read(path, "x,y,z")) {
    Vec3 p{csv::to_double(row, 0), csv::to_double(row, 1), csv::to_double(row, 2)};
    for (const double v : p) {
      if (!std::isfinite(v)) throw ParseError(row.line, "path: non-finite coordinate");
    }
    trace.poses.push_back(p);
  }
  if (trace.poses.empty()) throw ParseError(0, path.string() + ": path has no poses");
  return trace;
}

std::vector<CellIndex> detect_frontiers(const VoxelGrid& grid) {
  std::vector<CellIndex> out;
  const auto& d = grid.dims();
  for (int x = 0; x < d[0]; ++x) {
    for (int y = 0; y < d[1]; ++y) {
      for (int z = 0; z < d[2]; ++z) {
        const CellIndex c{x, y, z};
        if (grid.at(c) != CellState::Free) continue;
        for (const auto& off : kFaceNeighbors) {
          const CellIndex n{x + off[0], y + off[1], z + off[2]};
          if (grid.in_bounds(n) && grid.at(n) == CellState::Unknown) {
            out.push_back(c);
            break;
          }
        }
      }
    }
  }
  return out;
}

std::vector<CellIndex> filter_vertical(std::span<const CellIndex> frontiers, double robot_z,
                                       const VoxelGrid& grid) {
  std::vector<CellIndex> out;
  for (const auto& c : frontiers) {
    const double z = grid.center(c)[2];
    if (z > robot_z + 1.0 || z < robot_z - 0.1) out.push_back(c);
  }
  return out;
}

std::vector<Vec3> resample_path(const PathTrace& path, double spacing) {
  if (!(spacing > 0.0)) throw InvalidParameter("path resampling: spacing must be > 0");
  if (path.poses.empty()) throw InvalidParameter("path resampling: empty path");

  std::vector<double> arc(path.poses.size(), 0.0);
  for (std::size_t k = 1; k < path.poses.size(); ++k) {
    arc[k] = arc[k - 1] + distance(path.poses[k - 1], path.poses[k]);
  }
  const double length = arc.back();
  const double slack = 1e-9 * std::max(1.0, length);

  std::vector<Vec3> out;
  std::size_t seg = 0;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (s > length + slack) break;
    while (seg + 1 < path.poses.size() - 1 && arc[seg + 1] < s) ++seg;
    if (path.poses.size() == 1) {
      out.push_back(path.poses.front());
      continue;
    }
    const double seg_len = arc[seg + 1] - arc[seg];
    const double t = seg_len > 0.0 ? std::clamp((s - arc[seg]) / seg_len, 0.0, 1.0) : 0.0;
    const Vec3& a = path.poses[seg];
    const Vec3& b = path.poses[seg + 1];
    out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])});
  }
  return out;
}

RewardSequence rewards_along_path(const VoxelGrid& grid, const PathTrace& path, double spacing,
                                  double radius) {
  if (!(radius > 0.0)) throw InvalidParameter("rewards: radius must be > 0");
  const auto frontiers = detect_frontiers(grid);
  RewardSequence out;
  for (const auto& point : resample_path(path, spacing)) {
    std::int64_t reward = 0;
    for (const auto& c : filter_vertical(frontiers, point[2], grid)) {
      if (distance(grid.center(c), point) <= radius) ++reward;
    }
    out.push_back({point, reward});
  }
  return out;
}

void write_rewards_csv(const RewardSequence& rewards, std::ostream& out) {
  out << "index,x,y,z,reward\n";
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    const auto& p = rewards[k].pose;
    out << k + 1 << ',' << csv::format_double(p[0]) << ',' << csv::format_double(p[1]) << ','
        << csv::format_double(p[2]) << ',' << rewards[k].reward << '\n';
  }
}

RewardSequence load_rewards_csv(const std::filesystem::path& path) {
  RewardSequence out;
  for (const auto& row : csv::read(path, "index,x,y,z,reward")) {
    const auto reward = csv::to_int(row, 4);
    if (reward < 0) throw ParseError(row.line, "rewards: negative reward");
    out.push_back({{csv::to_double(row, 1), csv::to_double(row, 2), csv::to_double(row, 3)}, reward});
  }
  if (out.empty()) throw ParseError(0, path.string() + ": no rewards");
  return out;
}

EmpiricalPrior prior_from_rewards(const RewardSequence& rewards) {
  if (rewards.empty()) throw InvalidParameter("prior_from_rewards: empty reward sequence");
  std::map<std::int64_t, std::uint64_t> counts;
  for (const auto& p : rewards) ++counts[p.reward];
  return EmpiricalPrior(std::move(counts));
}

}  // namespace ssap::frontier
