#include <algorithm>
#include <map>

#include "doctest.h"
#include "mtcd2d/energy.hpp"
#include "mtcd2d/protocol.hpp"
#include "support.hpp"

using namespace mtcd2d;
using testing::kCases;
using testing::make_device;

namespace {

// Small network with hand-set link rates.
struct Net {
  std::vector<Device> devices;
  std::vector<RadioLink> up;
  std::vector<RadioLink> down;
  std::map<std::pair<NodeId, NodeId>, double> d2d_loss;
  double d2d_rate = 50000.0;

  NodeId add(double ul_rate, int reports = 24) {
    const auto id = static_cast<NodeId>(devices.size());
    auto d = make_device(id, 300.0 + id, 0.0);
    d.reports_per_day = reports;
    devices.push_back(d);
    up.push_back({id, kBaseStation, 120.0, 5.0, ul_rate});
    down.push_back({kBaseStation, id, 120.0, 20.0, 200000.0});
    return id;
  }

  LinkBook book() const {
    LinkBook b;
    b.devices = devices;
    b.uplink = up;
    b.downlink = down;
    b.control_floor_bps = 27414.0;
    b.d2d = [this](NodeId tx, NodeId rx) {
      const auto it = d2d_loss.find({std::min(tx, rx), std::max(tx, rx)});
      const double pl = it == d2d_loss.end() ? 120.0 : it->second;
      return RadioLink{tx, rx, pl, 0.0, pl > 150.0 ? 0.0 : d2d_rate};
    };
    return b;
  }
};

AssignmentMap modes(const Net& n, std::initializer_list<std::pair<Mode, std::optional<NodeId>>> ms) {
  AssignmentMap a;
  NodeId i = 0;
  for (const auto& [m, r] : ms) a.push_back({i++, m, r, 0.0});
  REQUIRE(a.size() == n.devices.size());
  return a;
}

std::size_t count_episodes(const EventTrace& t, NodeId node, EpisodeKind kind) {
  return static_cast<std::size_t>(std::count_if(t.episodes.begin(), t.episodes.end(), [&](const Episode& e) {
    return e.node == node && e.kind == kind;
  }));
}

std::size_t count_messages(const EventTrace& t, MessageKind kind) {
  return static_cast<std::size_t>(
      std::count_if(t.messages.begin(), t.messages.end(), [&](const Message& m) { return m.kind == kind; }));
}

}  // namespace

TEST_CASE("formation: accepted pair walks all six steps") {
  Net n;
  const NodeId remote = n.add(0.0);
  const NodeId relay = n.add(100000.0);
  n.d2d_loss[{remote, relay}] = 130.0;
  const auto a = modes(n, {{Mode::Remote, relay}, {Mode::Relay, std::nullopt}});
  const auto f = run_formation(a, n.book(), TmsPolicy{}, ProtocolParams{}, 10.0);
  REQUIRE(f.pairs.size() == 1);
  CHECK(f.pairs[0].outcome == FormationOutcome::Established);

  // step 2: two site configs; 3: announcement; 4: response; 5: two security; 6: report
  const std::vector<MessageKind> expected{MessageKind::SibDciConfig,     MessageKind::SibDciConfig,
                                          MessageKind::DiscoveryAnnouncement, MessageKind::DiscoveryResponse,
                                          MessageKind::SecurityExchange, MessageKind::SecurityExchange,
                                          MessageKind::FormationReport};
  REQUIRE(f.trace.messages.size() == expected.size());
  std::size_t from_devices = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(f.trace.messages[i].kind == expected[i]);
    if (f.trace.messages[i].src != kBaseStation) ++from_devices;
    if (i > 0) CHECK(f.trace.messages[i].timestamp >= f.trace.messages[i - 1].timestamp);
  }
  CHECK(from_devices == 5);
  CHECK(f.trace.messages[3].positive);
  CHECK(f.trace.messages[0].timestamp == 10.0);
  CHECK(f.end_time > 10.0);
}

TEST_CASE("formation: rejected pair still reports") {
  Net n;
  const NodeId remote = n.add(0.0);
  const NodeId relay = n.add(100000.0);
  n.d2d_loss[{remote, relay}] = 140.0;
  const auto a = modes(n, {{Mode::Remote, relay}, {Mode::Relay, std::nullopt}});
  const auto f = run_formation(a, n.book(), TmsPolicy{}, ProtocolParams{}, 0.0);
  CHECK(f.pairs[0].outcome == FormationOutcome::Rejected);
  CHECK(count_messages(f.trace, MessageKind::SecurityExchange) == 0);
  CHECK(count_messages(f.trace, MessageKind::FormationReport) == 1);
  CHECK_FALSE(f.trace.messages.back().positive);
  CHECK_FALSE(f.trace.messages[3].positive);
}

TEST_CASE("formation: no pairs, empty trace") {
  Net n;
  n.add(1000.0);
  const auto f = run_formation(modes(n, {{Mode::Cellular, std::nullopt}}), n.book(), TmsPolicy{}, ProtocolParams{}, 0.0);
  CHECK(f.trace.messages.empty());
  CHECK(f.trace.episodes.empty());
  CHECK(f.pairs.empty());
}

TEST_CASE("report cycle: cellular transmit duration") {
  Net n;
  n.add(100000.0, 1);
  const auto r = run_report_cycle(modes(n, {{Mode::Cellular, std::nullopt}}), n.book(), ProtocolParams{}, 0.0, 86400.0);
  std::vector<Episode> tx;
  for (const auto& e : r.trace.episodes)
    if (e.kind == EpisodeKind::Transmit) tx.push_back(e);
  REQUIRE(tx.size() == 1);
  CHECK(tx[0].duration == doctest::Approx(2000.0 / 100000.0));
  CHECK(tx[0].duration == doctest::Approx(0.02));
  CHECK(count_episodes(r.trace, 0, EpisodeKind::CpEstablish) == 1);
  CHECK(count_episodes(r.trace, 0, EpisodeKind::ClockSync) == 1);
  CHECK(r.packets_generated == 1);
  CHECK(r.packets_delivered == 1);
}

TEST_CASE("report cycle: mobile-terminated traffic adds one paging listen") {
  Net n;
  n.add(100000.0, 3);
  ProtocolParams p;
  p.origin = TrafficOrigin::MobileTerminated;
  const auto r = run_report_cycle(modes(n, {{Mode::Cellular, std::nullopt}}), n.book(), p, 0.0, 86400.0);
  CHECK(count_episodes(r.trace, 0, EpisodeKind::PagingListen) == 3);
  for (const auto& e : r.trace.episodes) {
    if (e.kind == EpisodeKind::PagingListen) {
      CHECK(e.duration == doctest::Approx(0.010));
      // listen precedes the clock sync it triggers
      const auto sync = std::find_if(r.trace.episodes.begin(), r.trace.episodes.end(), [&](const Episode& x) {
        return x.kind == EpisodeKind::ClockSync && x.start >= e.start;
      });
      REQUIRE(sync != r.trace.episodes.end());
      CHECK(sync->start == doctest::Approx(e.start + e.duration));
    }
  }
}

TEST_CASE("report cycle: relay aggregation and unreachable silence") {
  Net n;
  const NodeId relay = n.add(100000.0, 1);
  const NodeId r1 = n.add(0.0, 1);
  const NodeId r2 = n.add(0.0, 1);
  const NodeId dead = n.add(0.0, 1);
  const auto a = modes(n, {{Mode::Relay, std::nullopt}, {Mode::Remote, relay}, {Mode::Remote, relay},
                           {Mode::Unreachable, std::nullopt}});
  const auto r = run_report_cycle(a, n.book(), ProtocolParams{}, 0.0, 86400.0);
  std::size_t cp_in_window = 0;
  for (const auto& e : r.trace.episodes)
    if (e.node == relay && e.kind == EpisodeKind::CpEstablish && e.start < 86400.0) ++cp_in_window;
  CHECK(cp_in_window == 1);
  CHECK(count_episodes(r.trace, relay, EpisodeKind::CpEstablish) <= 2);
  CHECK(count_episodes(r.trace, relay, EpisodeKind::Receive) >= 2);
  CHECK(count_episodes(r.trace, r1, EpisodeKind::CpEstablish) == 0);
  CHECK(count_episodes(r.trace, r2, EpisodeKind::Transmit) == 1);
  for (const auto& e : r.trace.episodes) CHECK(e.node != dead);
  CHECK(r.packets_generated == 3);
  CHECK(r.packets_delivered == 3);

  ProtocolParams solo;
  solo.aggregation = false;
  const auto s = run_report_cycle(a, n.book(), solo, 0.0, 86400.0);
  CHECK(count_episodes(s.trace, relay, EpisodeKind::CpEstablish) == 3);
}

TEST_CASE("report cycle: zero-rate link in use is a contract violation") {
  Net n;
  const NodeId relay = n.add(100000.0, 1);
  const NodeId remote = n.add(0.0, 1);
  n.d2d_loss[{relay, remote}] = 160.0;
  const auto a = modes(n, {{Mode::Relay, std::nullopt}, {Mode::Remote, relay}});
  CHECK_THROWS_AS(run_report_cycle(a, n.book(), ProtocolParams{}, 0.0, 86400.0), ContractViolation);

  Net m;
  m.add(0.0, 1);
  CHECK_THROWS_AS(run_report_cycle(modes(m, {{Mode::Cellular, std::nullopt}}), m.book(), ProtocolParams{}, 0.0, 86400.0),
                  ContractViolation);
}

TEST_CASE("report cycle: reports wait for the formation exchange") {
  Net n;
  n.add(100000.0, 24);
  const auto r = run_report_cycle(modes(n, {{Mode::Cellular, std::nullopt}}), n.book(), ProtocolParams{}, 0.0, 86400.0, 5000.0);
  for (const auto& e : r.trace.episodes) CHECK(e.start >= 5000.0);
}

TEST_CASE("fsm: exhaustive table agrees with apply") {
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s <= static_cast<int>(FsmState::Serving); ++s)
      for (int e = 0; e <= static_cast<int>(FsmEvent::RxBsAck); ++e) {
        NodeState ns{static_cast<Role>(r), static_cast<FsmState>(s), std::nullopt};
        const auto next = fsm_transition(ns.role, ns.fsm_state, static_cast<FsmEvent>(e));
        if (next) {
          ns.apply(0, static_cast<FsmEvent>(e));
          CHECK(ns.fsm_state == *next);
        } else {
          CHECK_THROWS_AS(ns.apply(0, static_cast<FsmEvent>(e)), ContractViolation);
        }
      }
  CHECK(initial_state(Role::BS) == FsmState::Serving);
  CHECK(initial_state(Role::RemoteUE) == FsmState::Idle);
  NodeState remote{Role::RemoteUE, FsmState::Sleep, std::nullopt};
  CHECK_THROWS_AS(remote.apply(1, FsmEvent::TxForward), ContractViolation);
}

TEST_CASE("fsm: remote sends data only after association") {
  NodeState fresh{Role::RemoteUE, initial_state(Role::RemoteUE), std::nullopt};
  CHECK_THROWS_AS(fresh.apply(0, FsmEvent::TxData), ContractViolation);
  CHECK_THROWS_AS(fresh.apply(0, FsmEvent::ReportTimer), ContractViolation);
}

TEST_CASE("property: fuzzed interleavings of legal procedures") {
  using E = FsmEvent;
  const std::vector<std::pair<Role, std::vector<E>>> scripts{
      {Role::RemoteUE, {E::RxSibDci, E::RxAnnouncement, E::TxResponseAck, E::RxSecurity, E::TxSecurity, E::ReportTimer,
                        E::TxData, E::RxD2dAck, E::RxPage, E::ReportTimer, E::TxData, E::TxData, E::AckTimeout}},
      {Role::RemoteUE, {E::RxSibDci, E::RxAnnouncement, E::TxResponseNack}},
      {Role::RelayUE, {E::RxSibDci, E::TxAnnouncement, E::RxResponseAck, E::TxSecurity, E::RxSecurity,
                       E::TxFormationReport, E::RxData, E::TxD2dAck, E::ReportTimer, E::CpDone, E::TxData,
                       E::TxForward, E::RxBsAck, E::ForwardTimer, E::CpDone, E::TxForward, E::RxBsAck}},
      {Role::RelayUE, {E::RxSibDci, E::TxAnnouncement, E::RxResponseNack, E::TxFormationReport}},
      {Role::CellularUE, {E::RxPage, E::ReportTimer, E::CpDone, E::TxData, E::RxBsAck, E::ReportTimer, E::CpDone,
                          E::TxData, E::RxBsAck}},
      {Role::BS, {E::TxSibDci, E::TxPage, E::RxFormationReport, E::RxData, E::RxForward, E::TxBsAck}},
  };
  for (int c = 0; c < kCases; ++c) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(c)));
    // a bus of several nodes, each running one script; events interleave at random
    std::vector<std::size_t> script_of;
    std::vector<NodeState> nodes;
    std::vector<std::size_t> cursor;
    const auto count = 2 + rng.below(8);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto s = static_cast<std::size_t>(rng.below(scripts.size()));
      script_of.push_back(s);
      nodes.push_back({scripts[s].first, initial_state(scripts[s].first), std::nullopt});
      cursor.push_back(0);
    }
    for (;;) {
      std::vector<std::size_t> live;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (cursor[i] < scripts[script_of[i]].second.size()) live.push_back(i);
      if (live.empty()) break;
      const auto i = live[static_cast<std::size_t>(rng.below(live.size()))];
      REQUIRE_NOTHROW(nodes[i].apply(static_cast<NodeId>(i), scripts[script_of[i]].second[cursor[i]++]));
    }
  }
}

TEST_CASE("property: random networks keep traces well formed") {
  for (int c = 0; c < kCases; ++c) {
    Rng rng(derive_seed(5150, static_cast<std::uint64_t>(c)));
    Net n;
    n.d2d_rate = rng.uniform(5000.0, 200000.0);
    const auto size = 3 + static_cast<std::size_t>(rng.below(8));
    for (std::size_t i = 0; i < size; ++i) n.add(rng.uniform(5000.0, 300000.0), 1 + static_cast<int>(rng.below(24)));
    AssignmentMap a;
    std::vector<NodeId> relays;
    for (std::size_t i = 0; i < size; ++i) {
      const auto u = rng.below(4);
      Mode m = u == 0 ? Mode::Relay : u == 1 ? Mode::Unreachable : Mode::Cellular;
      if (i == 0) m = Mode::Relay;
      if (m == Mode::Relay) relays.push_back(static_cast<NodeId>(i));
      a.push_back({static_cast<NodeId>(i), m, std::nullopt, 0.0});
    }
    for (std::size_t i = 0; i < size; ++i) {
      if (a[i].mode == Mode::Relay || rng.below(2) == 0) continue;
      a[i].mode = Mode::Remote;
      a[i].paired_relay = relays[static_cast<std::size_t>(rng.below(relays.size()))];
      n.d2d_loss[{std::min<NodeId>(static_cast<NodeId>(i), *a[i].paired_relay),
                  std::max<NodeId>(static_cast<NodeId>(i), *a[i].paired_relay)}] = rng.uniform(110.0, 145.0);
    }
    ProtocolParams p;
    p.seed = rng.next_u64();
    p.origin = rng.below(2) ? TrafficOrigin::MobileTerminated : TrafficOrigin::MobileOriginated;
    p.aggregation = rng.below(4) != 0;
    p.d2d_loss_probability = rng.below(2) ? 0.0 : rng.uniform(0.0, 0.5);
    p.max_retransmissions = static_cast<int>(rng.below(3));

    const auto f = run_formation(a, n.book(), TmsPolicy{}, p, 0.0);
    for (const auto& o : f.pairs) {
      const double pl = n.book().d2d(o.relay, o.remote).pathloss_db;
      REQUIRE((o.outcome == FormationOutcome::Established) == (pl <= 136.0));
    }

    const auto r = run_report_cycle(a, n.book(), p, 0.0, 86400.0, f.end_time);
    const auto r2 = run_report_cycle(a, n.book(), p, 0.0, 86400.0, f.end_time);
    REQUIRE(r.trace.episodes.size() == r2.trace.episodes.size());
    for (std::size_t i = 0; i < r.trace.episodes.size(); ++i) REQUIRE(r.trace.episodes[i].start == r2.trace.episodes[i].start);

    // conservation: every generated packet is delivered or failed
    REQUIRE(r.packets_generated == r.packets_delivered + r.packets_failed);
    if (p.d2d_loss_probability == 0.0) REQUIRE(r.packets_failed == 0);

    // per-node episodes never overlap (the energy ledger rejects overlaps)
    EventTrace both = f.trace;
    both.append(r.trace);
    std::vector<NodeId> ids(size);
    for (std::size_t i = 0; i < size; ++i) ids[i] = static_cast<NodeId>(i);
    REQUIRE_NOTHROW(energy_of_trace(both, PowerModel{}, 2 * 86400.0, ids));

    // causality: acks follow the data they answer; relays forward only what they acknowledged
    std::vector<double> acked_bits(size, 0.0), forwarded_bits(size, 0.0);
    const Message* last_data = nullptr;
    for (const auto& m : r.trace.messages) {
      if (m.kind == MessageKind::DataPacket && m.dst != kBaseStation) last_data = &m;
      if (m.kind == MessageKind::D2dAck) {
        REQUIRE(last_data != nullptr);
        REQUIRE(last_data->dst == m.src);
        REQUIRE(m.timestamp >= last_data->timestamp + last_data->payload_bits / n.d2d_rate - 1e-9);
        acked_bits[m.src] += last_data->payload_bits;
      }
      if (m.kind == MessageKind::RelayForward) forwarded_bits[m.src] += m.payload_bits;
      if (m.kind == MessageKind::DataPacket && m.src != kBaseStation && m.dst != kBaseStation)
        REQUIRE(a[m.src].paired_relay == m.dst);
    }
    for (std::size_t i = 0; i < size; ++i) REQUIRE(forwarded_bits[i] == doctest::Approx(acked_bits[i]));
  }
}
