#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "mtcd2d/channel.hpp"
#include "mtcd2d/clustering.hpp"
#include "mtcd2d/energy.hpp"
#include "mtcd2d/geometry.hpp"
#include "mtcd2d/protocol.hpp"
#include "mtcd2d/tms.hpp"

namespace mtcd2d {

struct GeometryConfig {
  double cell_radius = 866.0;
  GridSpec grid = GridSpec::madrid();
  std::size_t device_count = 20000;
  DeviceDefaults device;
};

struct OutputOptions {
  bool links = false;
  bool trace = false;
  bool environment = false;
};

struct RunConfig {
  std::uint64_t seed = 1;
  double simulated_days = 1.0;
  std::string output_dir = "out";
  bool d2d_enabled = true;
  std::vector<ClusteringMethod> methods{ClusteringMethod::Geometric};

  GeometryConfig geometry;
  ChannelParams channel;
  ClusteringSpec clustering;
  TmsPolicy tms;
  ProtocolParams protocol;
  PowerModel power;
  OutputOptions outputs;

  /// Checks every block against its module's preconditions.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);

/// Parses a config document; missing keys keep their defaults, unknown keys
/// are rejected with ConfigError.
RunConfig config_from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path);

/// FNV-1a over the canonical JSON of everything except the output location.
std::string config_fingerprint(const RunConfig& c);

}  // namespace mtcd2d
