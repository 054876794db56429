#include "mtcd2d/metrics.hpp"

#include <algorithm>

namespace mtcd2d {

double availability(const AssignmentMap& assignments) {
  if (assignments.empty()) throw ConfigError("metrics: availability of an empty device set is undefined");
  std::size_t served = 0;
  for (const auto& a : assignments) {
    if (a.mode != Mode::Unreachable) ++served;
  }
  return static_cast<double>(served) / static_cast<double>(assignments.size());
}

BatteryCdf battery_cdf(std::span<const double> lives_days) {
  if (lives_days.empty()) throw ConfigError("metrics: battery CDF of an empty set is undefined");
  std::vector<double> sorted(lives_days.begin(), lives_days.end());
  std::sort(sorted.begin(), sorted.end());
  BatteryCdf out;
  const auto n = static_cast<double>(sorted.size());
  out.points.reserve(sorted.size());
  std::size_t meeting = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.points.push_back({sorted[i], static_cast<double>(i + 1) / n});
    if (sorted[i] >= kTenYearsDays) ++meeting;
  }
  out.frac_meeting_10y = static_cast<double>(meeting) / n;
  return out;
}

std::vector<double> effective_battery_lives(std::span<const EnergyReport> reports, const AssignmentMap& assignments) {
  if (reports.size() != assignments.size()) throw ContractViolation("metrics", "one energy report per device required");
  std::vector<double> out;
  out.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].device_id != assignments[i].device_id)
      throw ContractViolation("metrics", "energy reports and assignments out of order");
    out.push_back(assignments[i].mode == Mode::Unreachable ? 0.0 : reports[i].battery_life_days);
  }
  return out;
}

}  // namespace mtcd2d
