#include "mtcd2d/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "mtcd2d/rng.hpp"

namespace mtcd2d {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Cellular: return "cellular";
    case Mode::Relay: return "relay";
    case Mode::Remote: return "remote";
    case Mode::Unreachable: return "unreachable";
  }
  return "?";
}

GridSpec GridSpec::madrid() {
  // Four block columns and four block rows separated by 12 m streets (6 m on
  // each grid edge so that replicas abut with a full street between them).
  static constexpr double kCols[4][2] = {{6, 96}, {108, 183}, {195, 291}, {303, 381}};
  static constexpr double kRows[4][2] = {{6, 140}, {152, 262}, {274, 414}, {426, 546}};
  static constexpr int kParkCol = 1;
  static constexpr int kParkRow = 2;

  GridSpec spec;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const Rect block{kCols[c][0], kRows[r][0], kCols[c][1], kRows[r][1]};
      if (c == kParkCol && r == kParkRow) {
        spec.park = block;
      } else {
        spec.buildings.push_back(block);
      }
    }
  }
  return spec;
}

Rect Environment::tiling_bounds() const {
  const double hx = replicas_x * grid_width / 2.0;
  const double hy = replicas_y * grid_depth / 2.0;
  return {bs_position.x - hx, bs_position.y - hy, bs_position.x + hx, bs_position.y + hy};
}

Environment build_environment(const GridSpec& grid, double cell_radius, std::uint64_t seed) {
  if (!(cell_radius > 0.0)) throw ConfigError("geometry: cell_radius must be positive");
  if (!(grid.width > 0.0) || !(grid.depth > 0.0)) throw ConfigError("geometry: grid dimensions must be positive");
  if (grid.min_floors < 1 || grid.max_floors < grid.min_floors)
    throw ConfigError("geometry: invalid floor range");
  for (const auto& r : grid.buildings) {
    if (!(r.width() > 0.0) || !(r.depth() > 0.0))
      throw ConfigError("geometry: building footprint must have positive width and depth");
  }

  Environment env;
  env.bs_position = {0.0, 0.0, grid.bs_height};
  env.cell_radius = cell_radius;
  env.grid_width = grid.width;
  env.grid_depth = grid.depth;
  env.replicas_x = static_cast<int>(std::ceil(2.0 * cell_radius / grid.width));
  env.replicas_y = static_cast<int>(std::ceil(2.0 * cell_radius / grid.depth));

  Rng rng(seed);
  const double ox = -env.replicas_x * grid.width / 2.0;
  const double oy = -env.replicas_y * grid.depth / 2.0;
  const auto span = static_cast<std::uint64_t>(grid.max_floors - grid.min_floors + 1);
  for (int gy = 0; gy < env.replicas_y; ++gy) {
    for (int gx = 0; gx < env.replicas_x; ++gx) {
      const double bx = ox + gx * grid.width;
      const double by = oy + gy * grid.depth;
      for (const auto& r : grid.buildings) {
        Building b;
        b.footprint = {bx + r.x0, by + r.y0, bx + r.x1, by + r.y1};
        b.floors = grid.min_floors + static_cast<int>(rng.below(span));
        b.floor_height = grid.floor_height;
        env.buildings.push_back(b);
      }
    }
  }
  return env;
}

namespace {

double rect_disc_gap(const Rect& r, Vec2 c) {
  const double dx = std::max({r.x0 - c.x, 0.0, c.x - r.x1});
  const double dy = std::max({r.y0 - c.y, 0.0, c.y - r.y1});
  return std::hypot(dx, dy);
}

// Uniform in the open interval (lo, hi).
double open_uniform(Rng& rng, double lo, double hi) {
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  return lo + (hi - lo) * u;
}

}  // namespace

std::vector<Device> deploy_devices(const Environment& env, std::size_t n, std::uint64_t seed,
                                   const DeviceDefaults& defaults) {
  std::vector<Device> out;
  if (n == 0) return out;

  const Vec2 site = env.bs_position.horizontal();
  std::vector<int> candidates;
  std::vector<double> cumulative;
  double total = 0.0;
  for (std::size_t i = 0; i < env.buildings.size(); ++i) {
    const auto& b = env.buildings[i];
    if (rect_disc_gap(b.footprint, site) >= env.cell_radius) continue;
    total += b.footprint.area() * b.floors;
    candidates.push_back(static_cast<int>(i));
    cumulative.push_back(total);
  }
  if (candidates.empty()) throw ConfigError("geometry: environment has no building inside the cell");

  Rng rng(seed);
  out.reserve(n);
  while (out.size() < n) {
    // Building weighted by floor area, then a uniform point: uniform over the
    // indoor floor area. Points outside the disc are redrawn.
    const double pick = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const int bi = candidates[static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(candidates.size()) - 1))];
    const auto& b = env.buildings[static_cast<std::size_t>(bi)];
    const Vec2 p{open_uniform(rng, b.footprint.x0, b.footprint.x1), open_uniform(rng, b.footprint.y0, b.footprint.y1)};
    const int floor = static_cast<int>(rng.below(static_cast<std::uint64_t>(b.floors)));
    if (distance(p, site) > env.cell_radius) continue;

    Device d;
    d.id = static_cast<NodeId>(out.size());
    d.position = {p.x, p.y, defaults.antenna_height + b.floor_height * floor};
    d.building_id = bi;
    d.floor_index = floor;
    d.battery_capacity_j = defaults.battery_capacity_j;
    d.max_tx_power_dbm = defaults.max_tx_power_dbm;
    d.reports_per_day = defaults.reports_per_day;
    d.packet_bits = defaults.packet_bits;
    out.push_back(d);
  }
  return out;
}

double indoor_depth(const Building& b, Vec2 p) {
  const auto& f = b.footprint;
  if (!f.contains_strict(p)) return 0.0;
  return std::min({p.x - f.x0, f.x1 - p.x, p.y - f.y0, f.y1 - p.y});
}

}  // namespace mtcd2d
