#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mtcd2d/channel.hpp"
#include "mtcd2d/tms.hpp"
#include "mtcd2d/trace.hpp"

namespace mtcd2d {

enum class Role { BS, RelayUE, RemoteUE, CellularUE };

enum class FsmState {
  Idle,
  AwaitDiscovery,
  Deciding,
  Announcing,
  AwaitResponse,
  Securing,
  AwaitSecurity,
  Reporting,
  Sleep,
  Paged,
  TxPending,
  AwaitAck,
  Acking,
  CpSetup,
  Uplink,
  AwaitBsAck,
  Serving,
};

/// Everything that can move a node's state machine.
enum class FsmEvent {
  RxSibDci,
  TxAnnouncement,
  RxAnnouncement,
  TxResponseAck,
  TxResponseNack,
  RxResponseAck,
  RxResponseNack,
  TxSecurity,
  RxSecurity,
  TxFormationReport,
  RxFormationReport,
  TxSibDci,
  TxPage,
  RxPage,
  ReportTimer,
  ForwardTimer,
  CpDone,
  TxData,
  RxData,
  TxD2dAck,
  RxD2dAck,
  AckTimeout,
  TxForward,
  RxForward,
  TxBsAck,
  RxBsAck,
};

std::string_view to_string(Role r);
std::string_view to_string(FsmState s);
std::string_view to_string(FsmEvent e);

/// Next state, or nothing when the transition is undefined.
std::optional<FsmState> fsm_transition(Role role, FsmState state, FsmEvent event);

FsmState initial_state(Role role);

struct NodeState {
  Role role = Role::CellularUE;
  FsmState fsm_state = FsmState::Sleep;
  std::optional<NodeId> stored_config;  // other end of the configured D2D link

  /// Applies the event or throws ContractViolation naming the node, state and event.
  void apply(NodeId node, FsmEvent event);
};

enum class TrafficOrigin { MobileOriginated, MobileTerminated };

struct ProtocolParams {
  double control_bits = 256.0;
  bool aggregation = true;
  TrafficOrigin origin = TrafficOrigin::MobileOriginated;
  double d2d_loss_probability = 0.0;
  int max_retransmissions = 0;
  std::uint64_t seed = 0;
  // Fixed episode lengths; the runner copies them from the power model.
  double paging_s = 0.010;
  double clock_s = 0.010;
  double cp_s = 0.010;

  void validate() const;
};

/// Link state the procedures run on. Spans are indexed by device id.
struct LinkBook {
  std::span<const Device> devices;
  std::span<const RadioLink> uplink;
  std::span<const RadioLink> downlink;
  /// D2D link as measured by the two devices (shadowing included if enabled).
  std::function<RadioLink(NodeId tx, NodeId rx)> d2d;
  /// Rate used for control signalling when the carrying link has none of its own.
  double control_floor_bps = 0.0;
};

enum class FormationOutcome { Established, Rejected };

struct PairOutcome {
  NodeId remote = 0;
  NodeId relay = 0;
  FormationOutcome outcome = FormationOutcome::Rejected;
};

struct FormationResult {
  EventTrace trace;
  std::vector<PairOutcome> pairs;
  double end_time = 0.0;
};

/// Cluster formation / TMS update signalling for every Remote-Relay pair in
/// `assignments`, starting at `start_time`. A remote rejects when the
/// measured D2D pathloss exceeds the admission bound.
FormationResult run_formation(const AssignmentMap& assignments, const LinkBook& links, const TmsPolicy& policy,
                              const ProtocolParams& params, double start_time);

struct ReportCycleResult {
  EventTrace trace;
  std::size_t packets_generated = 0;
  std::size_t packets_delivered = 0;  // acknowledged by the site
  std::size_t packets_failed = 0;     // D2D delivery gave up after retransmissions
};

/// Uplink reports of every device over [start_time, start_time + duration_s).
/// Report instants are per-device phase offsets, uniform over one report
/// period and drawn from params.seed. No device starts before `not_before`
/// (the end of any formation exchange in the same interval).
ReportCycleResult run_report_cycle(const AssignmentMap& assignments, const LinkBook& links,
                                   const ProtocolParams& params, double start_time, double duration_s,
                                   double not_before = 0.0);

/// Episodes a device would generate over `duration_s` operating purely on
/// its cellular link. Used to estimate cellular energy for mode selection.
EventTrace cellular_only_trace(const Device& dev, const RadioLink& uplink, const RadioLink& downlink,
                               const ProtocolParams& params, double control_floor_bps, double duration_s);

/// Report phase offset of a device in [0, period).
double report_phase(std::uint64_t seed, NodeId device, double period_s);

}  // namespace mtcd2d
