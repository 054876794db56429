#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtcd2d/config.hpp"
#include "mtcd2d/metrics.hpp"

namespace mtcd2d {

/// Environment, deployment and link state shared by every method of one run.
struct Scenario {
  RunConfig config;
  Environment env;
  std::vector<Device> devices;
  ChannelParams channel;          // with the run's shadowing seed
  ChannelParams channel_estimate; // what the site assumes for D2D (no shadowing)
  std::vector<RadioLink> uplink;
  std::vector<RadioLink> downlink;
  std::vector<double> cellular_energy_j;  // per TMS interval, +inf without rate
  ProtocolParams protocol;                // durations synced with the power model
  double control_floor_bps = 0.0;
};

Scenario prepare_scenario(const RunConfig& config);

struct TrafficStats {
  std::size_t generated = 0;
  std::size_t delivered = 0;
  std::size_t failed = 0;
};

struct MethodRun {
  RunSummary summary;
  Clustering clustering;
  AssignmentMap assignments;
  std::vector<EnergyReport> reports;
  std::vector<double> lives_days;
  std::vector<PairOutcome> formation_log;
  TrafficStats traffic;
  EventTrace last_trace;  // filled only when keep_trace is set
};

/// Full pipeline for one method; nullopt runs the no-D2D baseline.
MethodRun run_method(const Scenario& scenario, std::optional<ClusteringMethod> method, bool keep_trace = false);

std::string run_label(std::optional<ClusteringMethod> method);

/// Writes summary.json, cdf_battery.csv, devices.csv, clusters.csv,
/// assignments.csv, energy.csv and the optional links/trace/environment files.
void write_artifacts(const Scenario& scenario, const MethodRun& run, const std::string& dir);

/// Runs the first configured method (or the baseline when D2D is disabled)
/// and writes its artifacts into config.output_dir.
RunSummary run_scenario(const RunConfig& config);

/// One run per entry on an identical environment and deployment; nullopt
/// entries are the baseline. Writes per-run subdirectories and comparison.csv.
std::vector<RunSummary> compare_methods(const RunConfig& config,
                                        std::span<const std::optional<ClusteringMethod>> methods);

}  // namespace mtcd2d
