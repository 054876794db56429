#include "mtcd2d/tms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtcd2d/energy.hpp"

namespace mtcd2d {

void TmsPolicy::validate() const {
  for (double v : {bl_threshold_days, snr_threshold_db, d2d_pathloss_max_db, delta_t_s}) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError("tms: thresholds must be finite and positive");
  }
  if (max_remotes_per_relay < 0) throw ConfigError("tms: max_remotes_per_relay must be non-negative");
}

double projected_cellular_life(double battery_j, const RadioLink& link, double energy_over_interval_j,
                               double delta_t_s) {
  if (link.rate_bps <= 0.0 || !std::isfinite(energy_over_interval_j)) return 0.0;
  if (energy_over_interval_j <= 0.0) return std::numeric_limits<double>::infinity();
  return battery_j / energy_over_interval_j * delta_t_s / kSecondsPerDay;
}

namespace {

void check_dense(const TmsInputs& in, NodeId id) {
  if (id >= in.devices.size() || in.devices[id].id != id || id >= in.cellular.size() || id >= in.battery_j.size())
    throw ContractViolation("tms", "device ids must index the device, link and battery tables");
}

double life_of(const TmsInputs& in, NodeId id, const TmsPolicy& policy) {
  check_dense(in, id);
  const auto& link = in.cellular[id];
  const double ec = link.rate_bps > 0.0 ? in.cellular_energy(in.devices[id], link)
                                        : std::numeric_limits<double>::infinity();
  return projected_cellular_life(in.battery_j[id], link, ec, policy.delta_t_s);
}

}  // namespace

ClusterClassification classify_cluster(const Cluster& cluster, const TmsInputs& in, const TmsPolicy& policy) {
  ClusterClassification out;
  for (NodeId id : cluster.members) {
    ModeAssignment a;
    a.device_id = id;
    a.projected_life_days = life_of(in, id, policy);
    a.mode = in.cellular[id].rate_bps > 0.0 ? Mode::Cellular : Mode::Unreachable;
    // Strict inequalities on both sides: a device exactly at the threshold is
    // neither a remote nor a relay.
    if (a.projected_life_days < policy.bl_threshold_days) {
      out.remote_candidates.push_back(id);
    } else if (a.projected_life_days > policy.bl_threshold_days && in.cellular[id].snr_db >= policy.snr_threshold_db) {
      out.feasible_relays.push_back(id);
    }
    out.members.push_back(a);
  }
  std::sort(out.remote_candidates.begin(), out.remote_candidates.end());
  std::sort(out.feasible_relays.begin(), out.feasible_relays.end());
  return out;
}

std::optional<NodeId> select_relay(NodeId remote, std::span<const NodeId> feasible_relays, const TmsInputs& in,
                                   const TmsPolicy& policy, const RejectionMemory& rejected,
                                   std::span<const int> load) {
  std::optional<NodeId> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (NodeId relay : feasible_relays) {
    if (relay == remote || rejected.contains(remote, relay)) continue;
    if (policy.max_remotes_per_relay > 0 && relay < load.size() && load[relay] >= policy.max_remotes_per_relay)
      continue;
    const double loss = in.d2d_loss(remote, relay);
    if (!(loss <= policy.d2d_pathloss_max_db)) continue;
    const double score =
        policy.relay_criterion == RelayCriterion::MinD2dPathloss ? loss : -in.cellular[relay].snr_db;
    // Candidates arrive in ascending id, so a strict comparison keeps the lower id on ties.
    if (score < best_score) {
      best_score = score;
      best = relay;
    }
  }
  return best;
}

AssignmentMap tms_round(const Clustering& clustering, const TmsInputs& in, const TmsPolicy& policy,
                        const RejectionMemory& rejected) {
  const std::size_t n = in.devices.size();
  AssignmentMap out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<NodeId>(i);
    check_dense(in, id);
    out[i].device_id = id;
    out[i].projected_life_days = life_of(in, id, policy);
    out[i].mode = in.cellular[i].rate_bps > 0.0 ? Mode::Cellular : Mode::Unreachable;
  }

  std::vector<int> load(n, 0);
  for (const auto& cluster : clustering.clusters) {
    const auto cls = classify_cluster(cluster, in, policy);
    for (NodeId remote : cls.remote_candidates) {
      const auto relay = select_relay(remote, cls.feasible_relays, in, policy, rejected, load);
      if (!relay) continue;  // falls back to Cellular / Unreachable by rate
      out[remote].mode = Mode::Remote;
      out[remote].paired_relay = *relay;
      out[*relay].mode = Mode::Relay;
      ++load[*relay];
    }
  }
  return out;
}

AssignmentMap baseline_assignments(const TmsInputs& in, const TmsPolicy& policy) {
  AssignmentMap out(in.devices.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    out[i].device_id = id;
    out[i].projected_life_days = life_of(in, id, policy);
    out[i].mode = in.cellular[i].rate_bps > 0.0 ? Mode::Cellular : Mode::Unreachable;
  }
  return out;
}

}  // namespace mtcd2d
