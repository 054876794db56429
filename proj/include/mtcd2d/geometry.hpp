#pragma once

#include <cstdint>
#include <vector>

#include "mtcd2d/types.hpp"

namespace mtcd2d {

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double depth() const { return y1 - y0; }
  double area() const { return width() * depth(); }
  bool contains_strict(Vec2 p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Building {
  Rect footprint;
  int floors = 0;
  double floor_height = 3.5;
};

/// Dense-urban block layout, replicated around the site.
struct GridSpec {
  double width = 387.0;   // west-east
  double depth = 552.0;   // north-south
  std::vector<Rect> buildings;  // grid-local footprints
  Rect park;
  int min_floors = 8;
  int max_floors = 15;
  double floor_height = 3.5;
  double bs_height = 25.0;

  /// The fixed 15-building + 1-park layout documented in docs/madrid_grid.md.
  static GridSpec madrid();
};

struct Environment {
  std::vector<Building> buildings;
  Vec3 bs_position;
  double cell_radius = 0.0;
  int replicas_x = 0;
  int replicas_y = 0;
  double grid_width = 0.0;
  double grid_depth = 0.0;

  /// Bounding rectangle of the replicated tiling, world coordinates.
  Rect tiling_bounds() const;
};

struct DeviceDefaults {
  double battery_capacity_j = 6500.0;
  double max_tx_power_dbm = 23.0;
  int reports_per_day = 24;
  double packet_bits = 2000.0;
  double antenna_height = 1.5;  // above the floor slab
};

struct Device {
  NodeId id = 0;
  Vec3 position;
  int building_id = -1;
  int floor_index = 0;
  double battery_capacity_j = 6500.0;
  double max_tx_power_dbm = 23.0;
  int reports_per_day = 24;
  double packet_bits = 2000.0;
};

Environment build_environment(const GridSpec& grid, double cell_radius, std::uint64_t seed);

/// Places n static devices uniformly over the indoor floor area that lies
/// inside the cell disc.
std::vector<Device> deploy_devices(const Environment& env, std::size_t n, std::uint64_t seed,
                                   const DeviceDefaults& defaults = {});

/// Horizontal distance from p to the nearest exterior wall of b. Zero outside.
double indoor_depth(const Building& b, Vec2 p);

}  // namespace mtcd2d
