#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtcd2d {

using NodeId = std::uint32_t;

/// The single macro site. Devices are numbered densely from 0.
inline constexpr NodeId kBaseStation = std::numeric_limits<NodeId>::max();

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  Vec2 horizontal() const { return {x, y}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

enum class Mode { Cellular, Relay, Remote, Unreachable };

std::string_view to_string(Mode m);

/// Raised when a module's contract is broken at runtime. The CLI maps it to
/// exit status 3; the message names the module and the invariant.
class ContractViolation : public std::logic_error {
 public:
  ContractViolation(std::string_view module, std::string_view what)
      : std::logic_error(std::string(module) + ": " + std::string(what)) {}
};

/// Invalid configuration or input. Exit status 2 from the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mtcd2d
