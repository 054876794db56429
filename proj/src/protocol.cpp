#include "mtcd2d/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "mtcd2d/energy.hpp"
#include "mtcd2d/rng.hpp"

namespace mtcd2d {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::BS: return "BS";
    case Role::RelayUE: return "RelayUE";
    case Role::RemoteUE: return "RemoteUE";
    case Role::CellularUE: return "CellularUE";
  }
  return "?";
}

std::string_view to_string(FsmState s) {
  static constexpr std::array<std::string_view, 17> kNames = {
      "Idle",    "AwaitDiscovery", "Deciding", "Announcing", "AwaitResponse", "Securing",
      "AwaitSecurity", "Reporting", "Sleep", "Paged", "TxPending", "AwaitAck",
      "Acking",  "CpSetup", "Uplink", "AwaitBsAck", "Serving"};
  return kNames.at(static_cast<std::size_t>(s));
}

std::string_view to_string(FsmEvent e) {
  static constexpr std::array<std::string_view, 26> kNames = {
      "RxSibDci",      "TxAnnouncement", "RxAnnouncement", "TxResponseAck", "TxResponseNack",
      "RxResponseAck", "RxResponseNack", "TxSecurity",     "RxSecurity",    "TxFormationReport",
      "RxFormationReport", "TxSibDci",   "TxPage",         "RxPage",        "ReportTimer",
      "ForwardTimer",  "CpDone",         "TxData",         "RxData",        "TxD2dAck",
      "RxD2dAck",      "AckTimeout",     "TxForward",      "RxForward",     "TxBsAck",
      "RxBsAck"};
  return kNames.at(static_cast<std::size_t>(e));
}

namespace {

constexpr std::size_t kRoles = 4;
constexpr std::size_t kStates = 17;
constexpr std::size_t kEvents = 26;

struct Transition {
  Role role;
  FsmState from;
  FsmEvent event;
  FsmState to;
};

using S = FsmState;
using E = FsmEvent;

// The complete transition relation. Anything absent is a protocol error.
constexpr Transition kTransitions[] = {
    // Remote UE: formation
    {Role::RemoteUE, S::Idle, E::RxSibDci, S::AwaitDiscovery},
    {Role::RemoteUE, S::Sleep, E::RxSibDci, S::AwaitDiscovery},
    {Role::RemoteUE, S::AwaitDiscovery, E::RxAnnouncement, S::Deciding},
    {Role::RemoteUE, S::Deciding, E::TxResponseAck, S::AwaitSecurity},
    {Role::RemoteUE, S::Deciding, E::TxResponseNack, S::Idle},
    {Role::RemoteUE, S::AwaitSecurity, E::RxSecurity, S::Securing},
    {Role::RemoteUE, S::Securing, E::TxSecurity, S::Sleep},
    // Remote UE: reporting over the D2D link
    {Role::RemoteUE, S::Sleep, E::RxPage, S::Paged},
    {Role::RemoteUE, S::Sleep, E::ReportTimer, S::TxPending},
    {Role::RemoteUE, S::Paged, E::ReportTimer, S::TxPending},
    {Role::RemoteUE, S::TxPending, E::TxData, S::AwaitAck},
    {Role::RemoteUE, S::AwaitAck, E::TxData, S::AwaitAck},
    {Role::RemoteUE, S::AwaitAck, E::RxD2dAck, S::Sleep},
    {Role::RemoteUE, S::AwaitAck, E::AckTimeout, S::Sleep},

    // Relay UE: formation
    {Role::RelayUE, S::Idle, E::RxSibDci, S::Announcing},
    {Role::RelayUE, S::Sleep, E::RxSibDci, S::Announcing},
    {Role::RelayUE, S::Announcing, E::TxAnnouncement, S::AwaitResponse},
    {Role::RelayUE, S::AwaitResponse, E::RxResponseAck, S::Securing},
    {Role::RelayUE, S::AwaitResponse, E::RxResponseNack, S::Reporting},
    {Role::RelayUE, S::Securing, E::TxSecurity, S::AwaitSecurity},
    {Role::RelayUE, S::AwaitSecurity, E::RxSecurity, S::Reporting},
    {Role::RelayUE, S::Reporting, E::TxFormationReport, S::Sleep},
    // Relay UE: serving remotes and its own uplink
    {Role::RelayUE, S::Sleep, E::RxData, S::Acking},
    {Role::RelayUE, S::Acking, E::TxD2dAck, S::Sleep},
    {Role::RelayUE, S::Sleep, E::RxPage, S::Paged},
    {Role::RelayUE, S::Paged, E::ReportTimer, S::CpSetup},
    {Role::RelayUE, S::Sleep, E::ReportTimer, S::CpSetup},
    {Role::RelayUE, S::Sleep, E::ForwardTimer, S::CpSetup},
    {Role::RelayUE, S::CpSetup, E::CpDone, S::Uplink},
    {Role::RelayUE, S::Uplink, E::TxData, S::AwaitBsAck},
    {Role::RelayUE, S::Uplink, E::TxForward, S::AwaitBsAck},
    {Role::RelayUE, S::AwaitBsAck, E::TxForward, S::AwaitBsAck},
    {Role::RelayUE, S::AwaitBsAck, E::RxBsAck, S::Sleep},

    // Cellular UE
    {Role::CellularUE, S::Sleep, E::RxPage, S::Paged},
    {Role::CellularUE, S::Paged, E::ReportTimer, S::CpSetup},
    {Role::CellularUE, S::Sleep, E::ReportTimer, S::CpSetup},
    {Role::CellularUE, S::CpSetup, E::CpDone, S::Uplink},
    {Role::CellularUE, S::Uplink, E::TxData, S::AwaitBsAck},
    {Role::CellularUE, S::AwaitBsAck, E::RxBsAck, S::Sleep},

    // Site
    {Role::BS, S::Serving, E::TxSibDci, S::Serving},
    {Role::BS, S::Serving, E::TxPage, S::Serving},
    {Role::BS, S::Serving, E::RxFormationReport, S::Serving},
    {Role::BS, S::Serving, E::RxData, S::Serving},
    {Role::BS, S::Serving, E::RxForward, S::Serving},
    {Role::BS, S::Serving, E::TxBsAck, S::Serving},
};

struct TransitionTable {
  std::array<std::array<std::array<int, kEvents>, kStates>, kRoles> next{};

  TransitionTable() {
    for (auto& r : next)
      for (auto& s : r) s.fill(-1);
    for (const auto& t : kTransitions) {
      next[static_cast<std::size_t>(t.role)][static_cast<std::size_t>(t.from)][static_cast<std::size_t>(t.event)] =
          static_cast<int>(t.to);
    }
  }
};

const TransitionTable& table() {
  static const TransitionTable t;
  return t;
}

}  // namespace

std::optional<FsmState> fsm_transition(Role role, FsmState state, FsmEvent event) {
  const int n = table().next[static_cast<std::size_t>(role)][static_cast<std::size_t>(state)]
                            [static_cast<std::size_t>(event)];
  if (n < 0) return std::nullopt;
  return static_cast<FsmState>(n);
}

FsmState initial_state(Role role) {
  switch (role) {
    case Role::BS: return FsmState::Serving;
    case Role::RelayUE:
    case Role::RemoteUE: return FsmState::Idle;
    case Role::CellularUE: return FsmState::Sleep;
  }
  return FsmState::Idle;
}

void NodeState::apply(NodeId node, FsmEvent event) {
  const auto next = fsm_transition(role, fsm_state, event);
  if (!next) {
    throw ContractViolation("protocol", "undefined transition for node " +
                                            (node == kBaseStation ? std::string("BS") : std::to_string(node)) + " (" +
                                            std::string(to_string(role)) + ") in state " +
                                            std::string(to_string(fsm_state)) + " on " +
                                            std::string(to_string(event)));
  }
  fsm_state = *next;
}

void ProtocolParams::validate() const {
  if (!(control_bits > 0.0)) throw ConfigError("protocol: control_bits must be positive");
  if (!(d2d_loss_probability >= 0.0 && d2d_loss_probability < 1.0))
    throw ConfigError("protocol: d2d_loss_probability must be in [0, 1)");
  if (max_retransmissions < 0) throw ConfigError("protocol: max_retransmissions must be non-negative");
  if (!(paging_s >= 0.0 && clock_s >= 0.0 && cp_s >= 0.0))
    throw ConfigError("protocol: episode durations must be non-negative");
}

double report_phase(std::uint64_t seed, NodeId device, double period_s) {
  Rng rng(derive_seed(seed, device));
  return rng.uniform() * period_s;
}

namespace {

// Shared bookkeeping for the formation and report procedures: a trace, one
// state machine per node, and the time each device becomes free again.
class Engine {
 public:
  Engine(const LinkBook& links, const ProtocolParams& params)
      : links_(links), params_(params), busy_(links.devices.size(), 0.0), nodes_(links.devices.size()) {
    bs_.role = Role::BS;
    bs_.fsm_state = FsmState::Serving;
  }

  EventTrace& trace() { return trace_; }
  NodeState& node(NodeId id) { return id == kBaseStation ? bs_ : nodes_.at(id); }
  double& busy(NodeId id) { return busy_.at(id); }

  void fixed_episode(NodeId id, EpisodeKind kind, double start, double duration) {
    trace_.episodes.push_back({start, id, kind, duration, 0.0, std::nullopt});
  }

  // Sends one message; the sender gets a Transmit episode and the receiver a
  // Receive episode over the same interval (the site has no energy ledger).
  // Returns the end of the transmission.
  double send(MessageKind kind, NodeId src, NodeId dst, double bits, double start, double rate_bps,
              std::optional<FsmEvent> tx_event, std::optional<FsmEvent> rx_event, bool positive = true,
              EpisodeKind rx_kind = EpisodeKind::Receive) {
    if (!(rate_bps > 0.0)) {
      throw ContractViolation("protocol", std::string("message ") + std::string(to_string(kind)) +
                                              " scheduled on a link without rate");
    }
    const double duration = bits / rate_bps;
    const std::size_t m = trace_.add_message({kind, src, dst, bits, start, positive});
    if (src != kBaseStation) {
      trace_.episodes.push_back({start, src, EpisodeKind::Transmit, duration,
                                 links_.devices[src].max_tx_power_dbm, m});
    }
    if (dst != kBaseStation) trace_.episodes.push_back({start, dst, rx_kind, duration, 0.0, m});
    if (tx_event) node(src).apply(src, *tx_event);
    if (rx_event) node(dst).apply(dst, *rx_event);
    return start + duration;
  }

  double uplink_rate(NodeId id) const { return links_.uplink[id].rate_bps; }
  double downlink_rate(NodeId id) const { return std::max(links_.downlink[id].rate_bps, links_.control_floor_bps); }

 private:
  const LinkBook& links_;
  const ProtocolParams& params_;
  EventTrace trace_;
  std::vector<double> busy_;
  std::vector<NodeState> nodes_;
  NodeState bs_;
};

void check_links(const LinkBook& links) {
  const auto n = links.devices.size();
  if (links.uplink.size() != n || links.downlink.size() != n)
    throw ContractViolation("protocol", "link tables must cover every device");
  for (std::size_t i = 0; i < n; ++i) {
    if (links.devices[i].id != i) throw ContractViolation("protocol", "device ids must be dense");
  }
}

// Site-paged wake-up for mobile-terminated traffic.
double page(Engine& eng, NodeId id, double t, const ProtocolParams& p) {
  if (p.origin != TrafficOrigin::MobileTerminated) return t;
  const double rate = p.paging_s > 0.0 ? p.control_bits / p.paging_s : 1.0;
  return eng.send(MessageKind::Page, kBaseStation, id, p.control_bits, t, rate, FsmEvent::TxPage, FsmEvent::RxPage,
                  true, EpisodeKind::PagingListen);
}

// Own uplink report of a cellular or relay device, optionally carrying
// buffered remote packets. Returns the end time.
double cellular_uplink(Engine& eng, NodeId id, const Device& dev, double t, const ProtocolParams& p,
                       FsmEvent trigger, bool own_packet, double forward_bits) {
  // Forwarding is relay-originated; only the device's own report is paged.
  if (trigger == FsmEvent::ReportTimer) t = page(eng, id, t, p);
  eng.node(id).apply(id, trigger);
  eng.fixed_episode(id, EpisodeKind::ClockSync, t, p.clock_s);
  t += p.clock_s;
  eng.fixed_episode(id, EpisodeKind::CpEstablish, t, p.cp_s);
  t += p.cp_s;
  eng.node(id).apply(id, FsmEvent::CpDone);
  const double rate = eng.uplink_rate(id);
  if (own_packet) t = eng.send(MessageKind::DataPacket, id, kBaseStation, dev.packet_bits, t, rate, FsmEvent::TxData, FsmEvent::RxData);
  if (forward_bits > 0.0)
    t = eng.send(MessageKind::RelayForward, id, kBaseStation, forward_bits, t, rate, FsmEvent::TxForward, FsmEvent::RxForward);
  return eng.send(MessageKind::BsAck, kBaseStation, id, p.control_bits, t, eng.downlink_rate(id), FsmEvent::TxBsAck,
                  FsmEvent::RxBsAck);
}

}  // namespace

FormationResult run_formation(const AssignmentMap& assignments, const LinkBook& links, const TmsPolicy& policy,
                              const ProtocolParams& params, double start_time) {
  check_links(links);
  Engine eng(links, params);
  FormationResult out;
  out.end_time = start_time;

  std::vector<std::pair<NodeId, NodeId>> pairs;  // (relay, remote)
  for (const auto& a : assignments) {
    if (a.mode == Mode::Remote) {
      if (!a.paired_relay) throw ContractViolation("protocol", "remote without a paired relay");
      pairs.emplace_back(*a.paired_relay, a.device_id);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [relay, remote] : pairs) {
    eng.node(relay).role = Role::RelayUE;
    eng.node(relay).fsm_state = FsmState::Idle;
    eng.node(remote).role = Role::RemoteUE;
    eng.node(remote).fsm_state = FsmState::Idle;
    eng.busy(relay) = std::max(eng.busy(relay), start_time);
    eng.busy(remote) = std::max(eng.busy(remote), start_time);
  }

  const double ctrl = params.control_bits;
  for (const auto& [relay, remote] : pairs) {
    double t = std::max(eng.busy(relay), eng.busy(remote));
    // Configuration of both ends by the site.
    const double t_relay = eng.send(MessageKind::SibDciConfig, kBaseStation, relay, ctrl, t, eng.downlink_rate(relay),
                                    FsmEvent::TxSibDci, FsmEvent::RxSibDci);
    const double t_remote = eng.send(MessageKind::SibDciConfig, kBaseStation, remote, ctrl, t,
                                     eng.downlink_rate(remote), FsmEvent::TxSibDci, FsmEvent::RxSibDci);
    t = std::max(t_relay, t_remote);

    const RadioLink fwd = links.d2d(relay, remote);
    const RadioLink back = links.d2d(remote, relay);
    const double fwd_rate = std::max(fwd.rate_bps, links.control_floor_bps);
    const double back_rate = std::max(back.rate_bps, links.control_floor_bps);

    t = eng.send(MessageKind::DiscoveryAnnouncement, relay, remote, ctrl, t, fwd_rate, FsmEvent::TxAnnouncement,
                 FsmEvent::RxAnnouncement);
    const bool accept = fwd.pathloss_db <= policy.d2d_pathloss_max_db && fwd.rate_bps > 0.0;
    t = eng.send(MessageKind::DiscoveryResponse, remote, relay, ctrl, t, back_rate,
                 accept ? FsmEvent::TxResponseAck : FsmEvent::TxResponseNack,
                 accept ? FsmEvent::RxResponseAck : FsmEvent::RxResponseNack, accept);
    if (accept) {
      t = eng.send(MessageKind::SecurityExchange, relay, remote, ctrl, t, fwd_rate, FsmEvent::TxSecurity,
                   FsmEvent::RxSecurity);
      t = eng.send(MessageKind::SecurityExchange, remote, relay, ctrl, t, back_rate, FsmEvent::TxSecurity,
                   FsmEvent::RxSecurity);
      eng.node(remote).stored_config = relay;
      eng.node(relay).stored_config = remote;
    }
    eng.busy(remote) = t;
    // Outcome reported either way; it rides on the relay's uplink without a
    // separate control-plane setup.
    t = eng.send(MessageKind::FormationReport, relay, kBaseStation, ctrl, t,
                 std::max(eng.uplink_rate(relay), links.control_floor_bps), FsmEvent::TxFormationReport,
                 FsmEvent::RxFormationReport, accept);
    eng.busy(relay) = t;
    out.end_time = std::max(out.end_time, t);
    out.pairs.push_back({remote, relay, accept ? FormationOutcome::Established : FormationOutcome::Rejected});
  }
  out.trace = std::move(eng.trace());
  return out;
}

ReportCycleResult run_report_cycle(const AssignmentMap& assignments, const LinkBook& links,
                                   const ProtocolParams& params, double start_time, double duration_s,
                                   double not_before) {
  check_links(links);
  if (assignments.size() != links.devices.size())
    throw ContractViolation("protocol", "one assignment per device required");
  Engine eng(links, params);
  ReportCycleResult out;
  Rng loss_rng(derive_seed(params.seed, 0x6c6f7373ULL));

  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    auto& ns = eng.node(id);
    eng.busy(id) = std::max(start_time, not_before);
    switch (assignments[i].mode) {
      case Mode::Cellular: ns.role = Role::CellularUE; ns.fsm_state = FsmState::Sleep; break;
      case Mode::Relay: ns.role = Role::RelayUE; ns.fsm_state = FsmState::Sleep; break;
      case Mode::Remote:
        ns.role = Role::RemoteUE;
        ns.fsm_state = FsmState::Sleep;
        ns.stored_config = assignments[i].paired_relay;
        break;
      case Mode::Unreachable: ns.role = Role::CellularUE; ns.fsm_state = FsmState::Idle; break;
    }
  }

  struct Report {
    double time;
    NodeId device;
    bool flush;
  };
  std::vector<Report> calendar;
  const double end = start_time + duration_s;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto& a = assignments[i];
    if (a.mode == Mode::Unreachable) continue;
    const auto& dev = links.devices[i];
    if (dev.reports_per_day <= 0) continue;
    const double period = kSecondsPerDay / dev.reports_per_day;
    for (double t = start_time + report_phase(params.seed, dev.id, period); t < end; t += period) {
      calendar.push_back({t, dev.id, false});
    }
  }
  std::sort(calendar.begin(), calendar.end(),
            [](const Report& a, const Report& b) { return std::tie(a.time, a.device) < std::tie(b.time, b.device); });

  std::vector<double> buffered_bits(assignments.size(), 0.0);
  std::vector<std::size_t> buffered_packets(assignments.size(), 0);

  auto relay_report = [&](NodeId id, double t, bool own, FsmEvent trigger) {
    const auto& dev = links.devices[id];
    const double fwd = buffered_bits[id];
    eng.busy(id) = cellular_uplink(eng, id, dev, t, params, trigger, own, fwd);
    out.packets_delivered += (own ? 1 : 0) + buffered_packets[id];
    buffered_bits[id] = 0.0;
    buffered_packets[id] = 0;
  };

  for (const auto& r : calendar) {
    const NodeId id = r.device;
    const auto& a = assignments[id];
    const auto& dev = links.devices[id];
    ++out.packets_generated;
    switch (a.mode) {
      case Mode::Cellular: {
        const double t = std::max(r.time, eng.busy(id));
        eng.busy(id) = cellular_uplink(eng, id, dev, t, params, FsmEvent::ReportTimer, true, 0.0);
        ++out.packets_delivered;
        break;
      }
      case Mode::Relay:
        relay_report(id, std::max(r.time, eng.busy(id)), true, FsmEvent::ReportTimer);
        break;
      case Mode::Remote: {
        if (!a.paired_relay) throw ContractViolation("protocol", "remote without a paired relay");
        const NodeId relay = *a.paired_relay;
        if (assignments.at(relay).mode != Mode::Relay)
          throw ContractViolation("protocol", "remote paired with a device that is not a relay");
        const RadioLink link = links.d2d(id, relay);
        const RadioLink back = links.d2d(relay, id);
        if (!(link.rate_bps > 0.0) || !(back.rate_bps > 0.0))
          throw ContractViolation("protocol", "D2D link in use has no rate");
        double t = std::max({r.time, eng.busy(id), eng.busy(relay)});
        t = page(eng, id, t, params);
        eng.node(id).apply(id, FsmEvent::ReportTimer);
        eng.fixed_episode(id, EpisodeKind::ClockSync, t, params.clock_s);
        t += params.clock_s;

        bool delivered = false;
        for (int attempt = 0; attempt <= params.max_retransmissions && !delivered; ++attempt) {
          const bool lost = params.d2d_loss_probability > 0.0 && loss_rng.uniform() < params.d2d_loss_probability;
          // A lost packet still occupies the relay's receiver for the slot.
          t = eng.send(MessageKind::DataPacket, id, relay, dev.packet_bits, t, link.rate_bps, FsmEvent::TxData,
                       lost ? std::nullopt : std::optional<FsmEvent>(FsmEvent::RxData));
          if (lost) continue;
          t = eng.send(MessageKind::D2dAck, relay, id, params.control_bits, t, back.rate_bps, FsmEvent::TxD2dAck,
                       FsmEvent::RxD2dAck);
          delivered = true;
        }
        eng.busy(id) = t;
        eng.busy(relay) = t;
        if (!delivered) {
          eng.node(id).apply(id, FsmEvent::AckTimeout);
          ++out.packets_failed;
          break;
        }
        buffered_bits[relay] += dev.packet_bits;
        ++buffered_packets[relay];
        if (!params.aggregation) relay_report(relay, t, false, FsmEvent::ForwardTimer);
        break;
      }
      case Mode::Unreachable: break;
    }
  }

  // Packets still buffered at the end go out at the relay's next wake-up.
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (buffered_packets[i] == 0) continue;
    const auto id = static_cast<NodeId>(i);
    const double period = kSecondsPerDay / links.devices[i].reports_per_day;
    double next = start_time + report_phase(params.seed, id, period);
    while (next < end) next += period;
    relay_report(id, std::max(next, eng.busy(id)), false, FsmEvent::ForwardTimer);
  }

  out.trace = std::move(eng.trace());
  return out;
}

EventTrace cellular_only_trace(const Device& dev, const RadioLink& uplink, const RadioLink& downlink,
                               const ProtocolParams& params, double control_floor_bps, double duration_s) {
  if (!(uplink.rate_bps > 0.0)) throw ContractViolation("protocol", "cellular trace requested without uplink rate");
  Device solo = dev;
  solo.id = 0;
  RadioLink ul = uplink;
  RadioLink dl = downlink;
  ul.tx_id = 0;
  dl.rx_id = 0;
  LinkBook links;
  links.devices = std::span<const Device>(&solo, 1);
  links.uplink = std::span<const RadioLink>(&ul, 1);
  links.downlink = std::span<const RadioLink>(&dl, 1);
  links.control_floor_bps = control_floor_bps;
  Engine eng(links, params);
  eng.node(0).role = Role::CellularUE;
  eng.node(0).fsm_state = FsmState::Sleep;
  if (dev.reports_per_day > 0) {
    const double period = kSecondsPerDay / dev.reports_per_day;
    for (double t = 0.0; t < duration_s; t += period) {
      eng.busy(0) = cellular_uplink(eng, 0, solo, std::max(t, eng.busy(0)), params, FsmEvent::ReportTimer, true, 0.0);
    }
  }
  return std::move(eng.trace());
}

}  // namespace mtcd2d
