#pragma once

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "mtcd2d/channel.hpp"
#include "mtcd2d/clustering.hpp"
#include "mtcd2d/geometry.hpp"

namespace mtcd2d {

enum class RelayCriterion { MinD2dPathloss, MaxCellularSnr };

struct TmsPolicy {
  double bl_threshold_days = 3650.0;
  double snr_threshold_db = 3.0;
  double d2d_pathloss_max_db = 136.0;
  double delta_t_s = 86400.0;
  RelayCriterion relay_criterion = RelayCriterion::MinD2dPathloss;
  int max_remotes_per_relay = 0;  // 0: unlimited

  void validate() const;
};

struct ModeAssignment {
  NodeId device_id = 0;
  Mode mode = Mode::Cellular;
  std::optional<NodeId> paired_relay;
  double projected_life_days = 0.0;  // 0 marks infinite consumption (no cellular rate)
};

using AssignmentMap = std::vector<ModeAssignment>;  // indexed by device id

/// Joules spent by `dev` over one TMS interval operating purely on its
/// cellular link. +inf when the link carries no rate.
using CellularEnergyFn = std::function<double(const Device& dev, const RadioLink& link)>;

/// D2D pathloss between a remote and a candidate relay, as the site sees it.
using D2dLossFn = std::function<double(NodeId remote, NodeId relay)>;

/// Remote/relay pairs that failed formation; never offered again.
class RejectionMemory {
 public:
  void add(NodeId remote, NodeId relay) { pairs_.emplace(remote, relay); }
  bool contains(NodeId remote, NodeId relay) const { return pairs_.count({remote, relay}) != 0; }
  std::size_t size() const { return pairs_.size(); }

 private:
  std::set<std::pair<NodeId, NodeId>> pairs_;
};

/// Inputs shared by every cluster in a round. All spans are indexed by device id.
struct TmsInputs {
  std::span<const Device> devices;
  std::span<const RadioLink> cellular;
  std::span<const double> battery_j;  // remaining charge
  CellularEnergyFn cellular_energy;
  D2dLossFn d2d_loss;
};

/// battery / EC scaled to days; 0 (the infinite-consumption marker) when the
/// link has no rate.
double projected_cellular_life(double battery_j, const RadioLink& link, double energy_over_interval_j,
                               double delta_t_s);

struct ClusterClassification {
  std::vector<ModeAssignment> members;     // provisional, one per member in member order
  std::vector<NodeId> remote_candidates;   // ascending id
  std::vector<NodeId> feasible_relays;     // ascending id
};

ClusterClassification classify_cluster(const Cluster& cluster, const TmsInputs& in, const TmsPolicy& policy);

/// Relay for `remote` among `feasible_relays`, or nullopt when none is
/// admissible. `load` (remotes already served, by device id) is consulted
/// only when the policy caps relays.
std::optional<NodeId> select_relay(NodeId remote, std::span<const NodeId> feasible_relays, const TmsInputs& in,
                                   const TmsPolicy& policy, const RejectionMemory& rejected,
                                   std::span<const int> load = {});

AssignmentMap tms_round(const Clustering& clustering, const TmsInputs& in, const TmsPolicy& policy,
                        const RejectionMemory& rejected);

/// No D2D: every device Cellular, or Unreachable without cellular rate.
AssignmentMap baseline_assignments(const TmsInputs& in, const TmsPolicy& policy);

}  // namespace mtcd2d
