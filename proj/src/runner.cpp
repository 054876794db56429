#include "mtcd2d/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "mtcd2d/io.hpp"
#include "mtcd2d/rng.hpp"

namespace mtcd2d {

namespace {

enum SeedStream : std::uint64_t {
  kEnvironmentStream = 1,
  kDeploymentStream = 2,
  kShadowStream = 3,
  kClusteringStream = 4,
  kProtocolStream = 5,
};

std::size_t mode_index(Mode m) { return static_cast<std::size_t>(m); }

// Pairs that did not form fall back to their own cellular link; relays left
// without a remote become plain cellular devices.
void resolve_assignments(AssignmentMap& a, const std::vector<RadioLink>& uplink) {
  std::vector<int> served(a.size(), 0);
  for (const auto& m : a) {
    if (m.mode == Mode::Remote) ++served.at(*m.paired_relay);
  }
  for (auto& m : a) {
    if (m.mode == Mode::Relay && served[m.device_id] == 0) m.mode = Mode::Cellular;
  }
  for (auto& m : a) {
    if (m.mode == Mode::Cellular || m.mode == Mode::Unreachable) {
      m.paired_relay.reset();
      m.mode = uplink[m.device_id].rate_bps > 0.0 ? Mode::Cellular : Mode::Unreachable;
    }
  }
}

void demote_rejected(AssignmentMap& a, const std::vector<PairOutcome>& outcomes, const std::vector<RadioLink>& uplink) {
  for (const auto& o : outcomes) {
    if (o.outcome != FormationOutcome::Rejected) continue;
    auto& m = a[o.remote];
    m.paired_relay.reset();
    m.mode = uplink[o.remote].rate_bps > 0.0 ? Mode::Cellular : Mode::Unreachable;
  }
  resolve_assignments(a, uplink);
}

}  // namespace

std::string run_label(std::optional<ClusteringMethod> method) {
  return method ? std::string(to_string(*method)) : std::string("baseline");
}

Scenario prepare_scenario(const RunConfig& config) {
  config.validate();
  Scenario s;
  s.config = config;
  GridSpec grid = config.geometry.grid;
  s.env = build_environment(grid, config.geometry.cell_radius, derive_seed(config.seed, kEnvironmentStream));
  s.devices = deploy_devices(s.env, config.geometry.device_count, derive_seed(config.seed, kDeploymentStream),
                             config.geometry.device);

  s.channel = config.channel;
  s.channel.shadow_seed = derive_seed(config.seed, kShadowStream);
  s.channel_estimate = s.channel;
  s.channel_estimate.shadowing = false;

  s.uplink = cellular_links(s.env, s.devices, s.channel);
  s.downlink.reserve(s.devices.size());
  for (const auto& d : s.devices) s.downlink.push_back(downlink(s.env, d, s.channel));

  s.protocol = config.protocol;
  s.protocol.seed = derive_seed(config.seed, kProtocolStream);
  s.protocol.paging_s = config.power.paging_s;
  s.protocol.clock_s = config.power.clock_s;
  s.protocol.cp_s = config.power.cp_s;

  // Lowest non-zero rate the link abstraction offers; control signalling is
  // assumed to get through at this rate even where data cannot.
  s.control_floor_bps = snr_to_rate(s.channel.cutoff_snr_db, s.channel.bandwidth_hz, s.channel);
  if (!(s.control_floor_bps > 0.0)) throw ConfigError("channel: no rate at the cutoff SNR");

  const double interval = config.tms.delta_t_s;
  s.cellular_energy_j.reserve(s.devices.size());
  const NodeId solo = 0;
  for (std::size_t i = 0; i < s.devices.size(); ++i) {
    if (!(s.uplink[i].rate_bps > 0.0)) {
      s.cellular_energy_j.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const auto trace = cellular_only_trace(s.devices[i], s.uplink[i], s.downlink[i], s.protocol, s.control_floor_bps, interval);
    const auto report = energy_of_trace(trace, config.power, interval, std::span<const NodeId>(&solo, 1));
    s.cellular_energy_j.push_back(report.front().energy_per_day_j * interval / kSecondsPerDay);
  }
  return s;
}

MethodRun run_method(const Scenario& s, std::optional<ClusteringMethod> method, bool keep_trace) {
  const auto& cfg = s.config;
  const std::size_t n = s.devices.size();
  MethodRun run;
  run.summary.label = run_label(method);
  run.summary.config_fingerprint = config_fingerprint(cfg);

  std::vector<NodeId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i);

  if (method) {
    ClusteringSpec spec = cfg.clustering;
    spec.method = *method;
    spec.rng_seed = derive_seed(cfg.seed, kClusteringStream);
    if (spec.k == 0) spec.k = geometric_cluster_count(cfg.geometry.cell_radius, spec.r_in, spec.a_sector);
    run.clustering = run_clustering(s.devices, s.uplink, cfg.geometry.cell_radius, spec);
    run.summary.cluster_count = static_cast<int>(run.clustering.clusters.size());
  } else {
    run.clustering.cluster_of.assign(n, -1);
  }

  std::vector<double> battery(n);
  for (std::size_t i = 0; i < n; ++i) battery[i] = s.devices[i].battery_capacity_j;

  LinkBook links;
  links.devices = s.devices;
  links.uplink = s.uplink;
  links.downlink = s.downlink;
  links.control_floor_bps = s.control_floor_bps;
  links.d2d = [&s](NodeId tx, NodeId rx) { return d2d_link(s.env, s.devices[tx], s.devices[rx], s.channel); };

  TmsInputs in;
  in.devices = s.devices;
  in.cellular = s.uplink;
  in.battery_j = battery;
  in.cellular_energy = [&s](const Device& d, const RadioLink&) { return s.cellular_energy_j[d.id]; };
  in.d2d_loss = [&s](NodeId remote, NodeId relay) {
    return d2d_pathloss(s.env, s.devices[remote], s.devices[relay], s.channel_estimate);
  };

  const double horizon = cfg.simulated_days * kSecondsPerDay;
  const double interval = cfg.tms.delta_t_s;
  std::vector<double> joules(n, 0.0);
  std::vector<std::array<double, kEpisodeKinds>> breakdown(n);
  RejectionMemory rejected;

  for (double t0 = 0.0; t0 < horizon - 1e-9; t0 += interval) {
    const double span = std::min(interval, horizon - t0);
    EventTrace round_trace;
    AssignmentMap assignments;
    double ready = t0;

    if (method) {
      // Pair, run formation, remember refusals and re-pair until every
      // offered pair either formed or has been excluded.
      std::set<std::pair<NodeId, NodeId>> formed;
      for (int attempt = 0;; ++attempt) {
        assignments = tms_round(run.clustering, in, cfg.tms, rejected);
        // Pairs already set up earlier in this round need no new signalling.
        AssignmentMap fresh = assignments;
        for (auto& m : fresh) {
          if (m.mode == Mode::Remote && formed.count({m.device_id, *m.paired_relay})) {
            m.mode = Mode::Cellular;
            m.paired_relay.reset();
          }
        }
        const auto formation = run_formation(fresh, links, cfg.tms, s.protocol, ready);
        round_trace.append(formation.trace);
        ready = formation.end_time;
        run.formation_log.insert(run.formation_log.end(), formation.pairs.begin(), formation.pairs.end());
        bool any_rejected = false;
        for (const auto& o : formation.pairs) {
          if (o.outcome == FormationOutcome::Established) formed.insert({o.remote, o.relay});
          if (o.outcome == FormationOutcome::Rejected) {
            rejected.add(o.remote, o.relay);
            any_rejected = true;
          }
        }
        if (!any_rejected) break;
        if (attempt >= 32) {
          demote_rejected(assignments, formation.pairs, s.uplink);
          break;
        }
      }
      resolve_assignments(assignments, s.uplink);
    } else {
      assignments = baseline_assignments(in, cfg.tms);
    }

    auto cycle = run_report_cycle(assignments, links, s.protocol, t0, span, ready);
    round_trace.append(cycle.trace);
    run.traffic.generated += cycle.packets_generated;
    run.traffic.delivered += cycle.packets_delivered;
    run.traffic.failed += cycle.packets_failed;

    // Energy of this round, shifted so the round starts at zero.
    for (auto& e : round_trace.episodes) e.start -= t0;
    const auto reports = energy_of_trace(round_trace, cfg.power, span, ids);
    for (std::size_t i = 0; i < n; ++i) {
      const double used = reports[i].energy_per_day_j * span / kSecondsPerDay;
      joules[i] += used;
      battery[i] = std::max(0.0, battery[i] - used);
      for (std::size_t k = 0; k < kEpisodeKinds; ++k) breakdown[i][k] += reports[i].breakdown[k] * span / kSecondsPerDay;
    }
    run.assignments = std::move(assignments);
    if (keep_trace) {
      for (auto& e : round_trace.episodes) e.start += t0;
      run.last_trace = std::move(round_trace);
    }
  }

  const double days = cfg.simulated_days;
  run.reports.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = run.reports[i];
    r.device_id = ids[i];
    r.energy_per_day_j = joules[i] / days;
    for (std::size_t k = 0; k < kEpisodeKinds; ++k) r.breakdown[k] = breakdown[i][k] / days;
    r.battery_life_days = battery_life_days(s.devices[i].battery_capacity_j, r.energy_per_day_j);
  }

  run.lives_days = effective_battery_lives(run.reports, run.assignments);
  run.summary.availability = availability(run.assignments);
  const auto cdf = battery_cdf(run.lives_days);
  run.summary.frac_meeting_10y = cdf.frac_meeting_10y;
  run.summary.cdf_points = cdf.points;
  for (const auto& a : run.assignments) ++run.summary.mode_counts[mode_index(a.mode)];
  return run;
}

void write_artifacts(const Scenario& s, const MethodRun& run, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&dir](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  write_file(path("summary.json"), summary_to_json(run.summary).dump(2) + "\n");
  write_file(path("cdf_battery.csv"), cdf_csv(run.summary.cdf_points));

  std::string dev = "device_id,x,y,z,building_id,floor_index,cluster_id,mode,paired_relay,pathloss_db,snr_db,rate_bps,"
                    "energy_per_day_j,battery_life_days\n";
  for (std::size_t i = 0; i < s.devices.size(); ++i) {
    const auto& d = s.devices[i];
    const auto& a = run.assignments[i];
    const int cluster = i < run.clustering.cluster_of.size() ? run.clustering.cluster_of[i] : -1;
    dev += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", d.id, d.position.x, d.position.y, d.position.z,
                       d.building_id, d.floor_index, cluster, to_string(a.mode),
                       a.paired_relay ? std::to_string(*a.paired_relay) : std::string(), s.uplink[i].pathloss_db,
                       s.uplink[i].snr_db, s.uplink[i].rate_bps, run.reports[i].energy_per_day_j,
                       run.lives_days[i]);
  }
  write_file(path("devices.csv"), dev);
  write_file(path("clusters.csv"), clusters_csv(run.clustering, run.summary.label));
  write_file(path("assignments.csv"), assignments_csv(run.assignments));
  write_file(path("energy.csv"), energy_csv(run.reports));

  if (s.config.outputs.links) {
    std::vector<RadioLink> all = s.uplink;
    for (const auto& a : run.assignments) {
      if (a.mode == Mode::Remote) {
        all.push_back(d2d_link(s.env, s.devices[a.device_id], s.devices[*a.paired_relay], s.channel));
      }
    }
    write_file(path("links.csv"), links_csv(all));
  }
  if (s.config.outputs.trace) write_file(path("trace.csv"), trace_lines(run.last_trace));
  if (s.config.outputs.environment) write_file(path("environment.json"), environment_to_json(s.env, s.devices).dump() + "\n");
}

RunSummary run_scenario(const RunConfig& config) {
  const Scenario s = prepare_scenario(config);
  const std::optional<ClusteringMethod> method =
      config.d2d_enabled ? std::optional<ClusteringMethod>(config.methods.front()) : std::nullopt;
  const auto run = run_method(s, method, config.outputs.trace);
  write_artifacts(s, run, config.output_dir);
  return run.summary;
}

std::vector<RunSummary> compare_methods(const RunConfig& config,
                                        std::span<const std::optional<ClusteringMethod>> methods) {
  if (methods.empty()) throw ConfigError("runner: compare_methods needs at least one method");
  const Scenario s = prepare_scenario(config);
  std::vector<RunSummary> out;
  std::string table = "label,availability,frac_meeting_10y,cluster_count,cellular,relay,remote,unreachable\n";
  for (const auto& m : methods) {
    const auto run = run_method(s, m, config.outputs.trace);
    write_artifacts(s, run, (std::filesystem::path(config.output_dir) / run.summary.label).string());
    const auto& r = run.summary;
    table += fmt::format("{},{},{},{},{},{},{},{}\n", r.label, r.availability, r.frac_meeting_10y, r.cluster_count,
                         r.mode_counts[0], r.mode_counts[1], r.mode_counts[2], r.mode_counts[3]);
    out.push_back(run.summary);
  }
  std::filesystem::create_directories(config.output_dir);
  write_file((std::filesystem::path(config.output_dir) / "comparison.csv").string(), table);
  return out;
}

}  // namespace mtcd2d
