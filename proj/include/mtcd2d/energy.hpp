#pragma once

#include <array>
#include <span>
#include <vector>

#include "mtcd2d/trace.hpp"

namespace mtcd2d {

/// Device power model. Powers in watts, durations in seconds.
struct PowerModel {
  double pa_efficiency = 0.45;
  double tx_circuitry_w = 0.060;
  double rx_w = 0.100;
  double paging_w = 0.100;
  double paging_s = 0.010;
  double clock_w = 0.100;
  double clock_s = 0.010;
  double cp_w = 0.200;
  double cp_s = 0.010;
  double sleep_w = 0.00001;
  int drx_per_day = 4;
  double capacity_j = 6500.0;

  void validate() const;
};

inline constexpr std::size_t kEpisodeKinds = 6;

struct EnergyReport {
  NodeId device_id = 0;
  double energy_per_day_j = 0.0;
  double battery_life_days = 0.0;
  std::array<double, kEpisodeKinds> breakdown{};  // J/day, indexed by EpisodeKind
};

inline constexpr double kSecondsPerDay = 86400.0;

double tx_power_w(double tx_power_dbm, const PowerModel& model);

/// Power drawn during one episode of the given kind.
double episode_power_w(const Episode& e, const PowerModel& model);

/// Prices every device's episodes over [0, horizon_s); non-episode time is
/// sleep. Baseline paging listens (drx_per_day per simulated day) are added
/// for days on which the trace has fewer listens than that. One report per
/// entry of `devices`, same order.
std::vector<EnergyReport> energy_of_trace(const EventTrace& trace, const PowerModel& model, double horizon_s,
                                          std::span<const NodeId> devices);

/// capacity / daily energy. +inf for zero energy, 0 for zero capacity.
double battery_life(const EnergyReport& report, const PowerModel& model);
double battery_life_days(double capacity_j, double energy_per_day_j);

}  // namespace mtcd2d
