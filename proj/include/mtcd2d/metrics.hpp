#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtcd2d/energy.hpp"
#include "mtcd2d/tms.hpp"

namespace mtcd2d {

inline constexpr double kTenYearsDays = 3650.0;

struct CdfPoint {
  double days = 0.0;
  double fraction = 0.0;
};

struct BatteryCdf {
  std::vector<CdfPoint> points;  // one per device, ascending
  double frac_meeting_10y = 0.0;
};

struct RunSummary {
  std::string label;
  double availability = 0.0;
  double frac_meeting_10y = 0.0;
  std::vector<CdfPoint> cdf_points;
  std::string config_fingerprint;
  int cluster_count = 0;
  std::array<std::size_t, 4> mode_counts{};  // indexed by Mode
};

/// Share of devices that can deliver uplink reports.
double availability(const AssignmentMap& assignments);

/// Empirical CDF of battery lives in days, plus the share at or above 3650 days.
BatteryCdf battery_cdf(std::span<const double> lives_days);

/// Battery life per device as reported on the CDF: the energy-derived life,
/// except Unreachable devices, which never deliver and are counted at zero.
std::vector<double> effective_battery_lives(std::span<const EnergyReport> reports, const AssignmentMap& assignments);

}  // namespace mtcd2d
