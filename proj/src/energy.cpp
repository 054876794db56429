#include "mtcd2d/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace mtcd2d {

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::SibDciConfig: return "SibDciConfig";
    case MessageKind::DiscoveryAnnouncement: return "DiscoveryAnnouncement";
    case MessageKind::DiscoveryResponse: return "DiscoveryResponse";
    case MessageKind::SecurityExchange: return "SecurityExchange";
    case MessageKind::FormationReport: return "FormationReport";
    case MessageKind::Page: return "Page";
    case MessageKind::DataPacket: return "DataPacket";
    case MessageKind::D2dAck: return "D2dAck";
    case MessageKind::RelayForward: return "RelayForward";
    case MessageKind::BsAck: return "BsAck";
  }
  return "?";
}

std::string_view to_string(EpisodeKind k) {
  switch (k) {
    case EpisodeKind::Transmit: return "Transmit";
    case EpisodeKind::Receive: return "Receive";
    case EpisodeKind::PagingListen: return "PagingListen";
    case EpisodeKind::ClockSync: return "ClockSync";
    case EpisodeKind::CpEstablish: return "CpEstablish";
    case EpisodeKind::Sleep: return "Sleep";
  }
  return "?";
}

void EventTrace::append(const EventTrace& other) {
  const std::size_t offset = messages.size();
  messages.insert(messages.end(), other.messages.begin(), other.messages.end());
  for (auto e : other.episodes) {
    if (e.message) *e.message += offset;
    episodes.push_back(e);
  }
}

void PowerModel::validate() const {
  if (!(pa_efficiency > 0.0 && pa_efficiency <= 1.0)) throw ConfigError("energy: pa_efficiency must be in (0, 1]");
  for (double w : {tx_circuitry_w, rx_w, paging_w, clock_w, cp_w, sleep_w}) {
    if (!(w > 0.0)) throw ConfigError("energy: powers must be positive");
  }
  for (double s : {paging_s, clock_s, cp_s}) {
    if (!(s >= 0.0)) throw ConfigError("energy: episode durations must be non-negative");
  }
  if (drx_per_day < 0) throw ConfigError("energy: drx_per_day must be non-negative");
  if (!(capacity_j >= 0.0)) throw ConfigError("energy: capacity must be non-negative");
}

double tx_power_w(double tx_power_dbm, const PowerModel& model) {
  return std::pow(10.0, (tx_power_dbm - 30.0) / 10.0) / model.pa_efficiency + model.tx_circuitry_w;
}

double episode_power_w(const Episode& e, const PowerModel& model) {
  switch (e.kind) {
    case EpisodeKind::Transmit: return tx_power_w(e.tx_power_dbm, model);
    case EpisodeKind::Receive: return model.rx_w;
    case EpisodeKind::PagingListen: return model.paging_w;
    case EpisodeKind::ClockSync: return model.clock_w;
    case EpisodeKind::CpEstablish: return model.cp_w;
    case EpisodeKind::Sleep: return model.sleep_w;
  }
  return 0.0;
}

std::vector<EnergyReport> energy_of_trace(const EventTrace& trace, const PowerModel& model, double horizon_s,
                                          std::span<const NodeId> devices) {
  std::unordered_map<NodeId, std::size_t> slot;
  slot.reserve(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) slot.emplace(devices[i], i);

  std::vector<std::vector<const Episode*>> per_device(devices.size());
  for (const auto& e : trace.episodes) {
    const auto it = slot.find(e.node);
    if (it != slot.end()) per_device[it->second].push_back(&e);
  }

  const int days = horizon_s > 0.0 ? static_cast<int>(std::ceil(horizon_s / kSecondsPerDay - 1e-12)) : 0;
  const double per_day_scale = horizon_s > 0.0 ? kSecondsPerDay / horizon_s : 0.0;

  std::vector<EnergyReport> out(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    auto& eps = per_device[i];
    std::stable_sort(eps.begin(), eps.end(), [](const Episode* a, const Episode* b) { return a->start < b->start; });

    std::array<double, kEpisodeKinds> joules{};
    double busy = 0.0;
    double prev_end = -std::numeric_limits<double>::infinity();
    std::vector<int> listens(static_cast<std::size_t>(std::max(days, 0)), 0);
    for (const Episode* e : eps) {
      if (e->duration < 0.0) throw ContractViolation("energy", "negative episode duration");
      if (e->start < prev_end - 1e-9) throw ContractViolation("energy", "overlapping episodes for one device");
      prev_end = e->start + e->duration;
      joules[static_cast<std::size_t>(e->kind)] += e->duration * episode_power_w(*e, model);
      if (e->kind != EpisodeKind::Sleep) busy += e->duration;
      if (e->kind == EpisodeKind::PagingListen && days > 0) {
        const auto d = std::clamp(static_cast<int>(e->start / kSecondsPerDay), 0, days - 1);
        ++listens[static_cast<std::size_t>(d)];
      }
    }
    for (int d = 0; d < days; ++d) {
      const double covered = std::min(kSecondsPerDay, horizon_s - d * kSecondsPerDay) / kSecondsPerDay;
      const double missing = std::max(0.0, model.drx_per_day * covered - listens[static_cast<std::size_t>(d)]);
      joules[static_cast<std::size_t>(EpisodeKind::PagingListen)] += missing * model.paging_s * model.paging_w;
      busy += missing * model.paging_s;
    }
    joules[static_cast<std::size_t>(EpisodeKind::Sleep)] += std::max(0.0, horizon_s - busy) * model.sleep_w;

    auto& r = out[i];
    r.device_id = devices[i];
    double total = 0.0;
    for (std::size_t k = 0; k < kEpisodeKinds; ++k) {
      r.breakdown[k] = joules[k] * per_day_scale;
      total += r.breakdown[k];
    }
    r.energy_per_day_j = total;
    r.battery_life_days = battery_life_days(model.capacity_j, total);
  }
  return out;
}

double battery_life_days(double capacity_j, double energy_per_day_j) {
  if (capacity_j <= 0.0) return 0.0;
  if (energy_per_day_j <= 0.0) return std::numeric_limits<double>::infinity();
  return capacity_j / energy_per_day_j;
}

double battery_life(const EnergyReport& report, const PowerModel& model) {
  return battery_life_days(model.capacity_j, report.energy_per_day_j);
}

}  // namespace mtcd2d
