#include "mtcd2d/io.hpp"

#include <fstream>

#include <fmt/format.h>

namespace mtcd2d {

using nlohmann::json;

json environment_to_json(const Environment& env, const std::vector<Device>& devices) {
  json j;
  j["bs_position"] = {env.bs_position.x, env.bs_position.y, env.bs_position.z};
  j["cell_radius"] = env.cell_radius;
  j["replicas"] = {env.replicas_x, env.replicas_y};
  j["grid"] = {env.grid_width, env.grid_depth};
  j["buildings"] = json::array();
  for (const auto& b : env.buildings) {
    j["buildings"].push_back({{"footprint", {b.footprint.x0, b.footprint.y0, b.footprint.x1, b.footprint.y1}},
                              {"floors", b.floors},
                              {"floor_height", b.floor_height}});
  }
  j["devices"] = json::array();
  for (const auto& d : devices) {
    j["devices"].push_back({{"id", d.id},
                            {"position", {d.position.x, d.position.y, d.position.z}},
                            {"building_id", d.building_id},
                            {"floor_index", d.floor_index},
                            {"battery_capacity_j", d.battery_capacity_j},
                            {"max_tx_power_dbm", d.max_tx_power_dbm},
                            {"reports_per_day", d.reports_per_day},
                            {"packet_bits", d.packet_bits}});
  }
  return j;
}

Environment environment_from_json(const json& j) {
  Environment env;
  const auto& bs = j.at("bs_position");
  env.bs_position = {bs.at(0).get<double>(), bs.at(1).get<double>(), bs.at(2).get<double>()};
  env.cell_radius = j.at("cell_radius").get<double>();
  env.replicas_x = j.at("replicas").at(0).get<int>();
  env.replicas_y = j.at("replicas").at(1).get<int>();
  env.grid_width = j.at("grid").at(0).get<double>();
  env.grid_depth = j.at("grid").at(1).get<double>();
  for (const auto& b : j.at("buildings")) {
    const auto& f = b.at("footprint");
    env.buildings.push_back({{f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>(), f.at(3).get<double>()},
                             b.at("floors").get<int>(),
                             b.at("floor_height").get<double>()});
  }
  return env;
}

std::vector<Device> devices_from_json(const json& j) {
  std::vector<Device> out;
  for (const auto& d : j.at("devices")) {
    Device dev;
    dev.id = d.at("id").get<NodeId>();
    const auto& p = d.at("position");
    dev.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    dev.building_id = d.at("building_id").get<int>();
    dev.floor_index = d.at("floor_index").get<int>();
    dev.battery_capacity_j = d.at("battery_capacity_j").get<double>();
    dev.max_tx_power_dbm = d.at("max_tx_power_dbm").get<double>();
    dev.reports_per_day = d.at("reports_per_day").get<int>();
    dev.packet_bits = d.at("packet_bits").get<double>();
    out.push_back(dev);
  }
  return out;
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["label"] = s.label;
  j["availability"] = s.availability;
  j["frac_meeting_10y"] = s.frac_meeting_10y;
  j["config_fingerprint"] = s.config_fingerprint;
  j["cluster_count"] = s.cluster_count;
  j["modes"] = {{"cellular", s.mode_counts[0]},
                {"relay", s.mode_counts[1]},
                {"remote", s.mode_counts[2]},
                {"unreachable", s.mode_counts[3]}};
  json cdf = json::array();
  for (const auto& p : s.cdf_points) cdf.push_back({p.days, p.fraction});
  j["cdf_points"] = std::move(cdf);
  return j;
}

std::string cdf_csv(const std::vector<CdfPoint>& points) {
  std::string out = "days,fraction\n";
  for (const auto& p : points) out += fmt::format("{},{}\n", p.days, p.fraction);
  return out;
}

std::string clusters_csv(const Clustering& c, std::string_view method) {
  std::string out = "device_id,cluster_id,method\n";
  for (std::size_t id = 0; id < c.cluster_of.size(); ++id) {
    if (c.cluster_of[id] >= 0) out += fmt::format("{},{},{}\n", id, c.cluster_of[id], method);
  }
  return out;
}

std::string assignments_csv(const AssignmentMap& a) {
  std::string out = "device_id,mode,paired_relay,projected_life_days\n";
  for (const auto& m : a) {
    out += fmt::format("{},{},{},{}\n", m.device_id, to_string(m.mode),
                       m.paired_relay ? std::to_string(*m.paired_relay) : std::string(), m.projected_life_days);
  }
  return out;
}

std::string energy_csv(const std::vector<EnergyReport>& reports) {
  std::string out =
      "device_id,energy_per_day_j,battery_life_days,transmit_j,receive_j,paging_j,clock_j,cp_j,sleep_j\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.device_id, r.energy_per_day_j, r.battery_life_days,
                       r.breakdown[0], r.breakdown[1], r.breakdown[2], r.breakdown[3], r.breakdown[4],
                       r.breakdown[5]);
  }
  return out;
}

namespace {
std::string node_name(NodeId id) { return id == kBaseStation ? std::string("bs") : std::to_string(id); }
}  // namespace

std::string links_csv(const std::vector<RadioLink>& links) {
  std::string out = "tx,rx,pathloss_db,snr_db,rate_bps\n";
  for (const auto& l : links) {
    out += fmt::format("{},{},{},{},{}\n", node_name(l.tx_id), node_name(l.rx_id), l.pathloss_db, l.snr_db, l.rate_bps);
  }
  return out;
}

std::string trace_lines(const EventTrace& trace) {
  std::string out;
  for (const auto& e : trace.episodes) {
    const std::string_view kind = e.message ? to_string(trace.messages.at(*e.message).kind) : std::string_view("-");
    out += fmt::format("{},{},{},{},{}\n", e.start, node_name(e.node), to_string(e.kind), e.duration, kind);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << content;
}

}  // namespace mtcd2d
