#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtcd2d/channel.hpp"
#include "mtcd2d/geometry.hpp"
#include "mtcd2d/rng.hpp"

namespace testing {

using namespace mtcd2d;

inline Device make_device(NodeId id, double x, double y, int building = -1, int floor = 0) {
  Device d;
  d.id = id;
  d.position = {x, y, 1.5 + 3.5 * floor};
  d.building_id = building;
  d.floor_index = floor;
  return d;
}

// One 40 x 40 m tower centred at (cx, cy).
inline Environment single_building(double cx, double cy, int floors = 10) {
  Environment env;
  env.buildings.push_back({{cx - 20.0, cy - 20.0, cx + 20.0, cy + 20.0}, floors, 3.5});
  env.bs_position = {0.0, 0.0, 25.0};
  env.cell_radius = 866.0;
  return env;
}

// n devices scattered uniformly over an annulus, no buildings.
inline std::vector<Device> scatter(std::size_t n, std::uint64_t seed, double r_max = 800.0, double r_min = 0.0) {
  Rng rng(seed);
  std::vector<Device> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt(rng.uniform(r_min * r_min, r_max * r_max));
    const double phi = rng.uniform(-3.141592653589793, 3.141592653589793);
    out.push_back(make_device(static_cast<NodeId>(i), r * std::cos(phi), r * std::sin(phi)));
  }
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mtcd2d_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline constexpr int kCases = 1000;

}  // namespace testing
