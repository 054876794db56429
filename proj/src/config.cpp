#include "mtcd2d/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

namespace mtcd2d {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object and rejects whatever is left over.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}.{}: {}", name_, key, e.what()));
    }
  }

  const json* child(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(fmt::format("{}: unknown key '{}'", name_, k));
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

std::string_view to_string(RelayCriterion c) {
  return c == RelayCriterion::MinD2dPathloss ? "min-d2d-pathloss" : "max-cellular-snr";
}

RelayCriterion parse_relay_criterion(const std::string& s) {
  if (s == "min-d2d-pathloss") return RelayCriterion::MinD2dPathloss;
  if (s == "max-cellular-snr") return RelayCriterion::MaxCellularSnr;
  throw ConfigError("tms.relay_criterion: unknown value '" + s + "'");
}

std::string_view to_string(TrafficOrigin o) { return o == TrafficOrigin::MobileOriginated ? "mo" : "mt"; }

TrafficOrigin parse_origin(const std::string& s) {
  if (s == "mo") return TrafficOrigin::MobileOriginated;
  if (s == "mt") return TrafficOrigin::MobileTerminated;
  throw ConfigError("protocol.origin: expected 'mo' or 'mt', got '" + s + "'");
}

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect parse_rect(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(where + ": expected [x0, y0, x1, y1]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(simulated_days > 0.0)) throw ConfigError("runner: simulated_days must be positive");
  if (methods.empty()) throw ConfigError("runner: at least one clustering method is required");
  if (!(geometry.cell_radius > 0.0)) throw ConfigError("geometry: cell_radius must be positive");
  if (geometry.grid.buildings.empty() && geometry.device_count > 0)
    throw ConfigError("geometry: no buildings to place devices in");
  if (geometry.device.reports_per_day < 0) throw ConfigError("geometry: reports_per_day must be non-negative");
  if (!(geometry.device.packet_bits > 0.0)) throw ConfigError("geometry: packet_bits must be positive");
  if (!(channel.bandwidth_hz > 0.0)) throw ConfigError("channel: bandwidth must be positive");
  if (!(channel.interior_wall_spacing_m > 0.0)) throw ConfigError("channel: interior_wall_spacing_m must be positive");
  if (channel.rate_model == RateModel::Table && channel.rate_table.empty())
    throw ConfigError("channel: rate table is empty");
  for (std::size_t i = 1; i < channel.rate_table.size(); ++i) {
    if (channel.rate_table[i].snr_db < channel.rate_table[i - 1].snr_db ||
        channel.rate_table[i].efficiency < channel.rate_table[i - 1].efficiency)
      throw ConfigError("channel: rate table must be non-decreasing in SNR and efficiency");
  }
  if (!(clustering.a_sector > 0.0)) throw ConfigError("clustering: a_sector must be positive");
  if (!(clustering.r_in >= 0.0 && clustering.r_in < geometry.cell_radius))
    throw ConfigError("clustering: need 0 <= r_in < cell_radius");
  if (clustering.k < 0) throw ConfigError("clustering: k must be non-negative (0 = geometric count)");
  tms.validate();
  protocol.validate();
  power.validate();
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["simulated_days"] = c.simulated_days;
  j["output_dir"] = c.output_dir;
  j["d2d_enabled"] = c.d2d_enabled;
  j["methods"] = json::array();
  for (auto m : c.methods) j["methods"].push_back(std::string(to_string(m)));

  const auto& g = c.geometry;
  json grid = {{"width", g.grid.width},         {"depth", g.grid.depth},
               {"min_floors", g.grid.min_floors}, {"max_floors", g.grid.max_floors},
               {"floor_height", g.grid.floor_height}, {"bs_height", g.grid.bs_height},
               {"park", rect_json(g.grid.park)}};
  grid["buildings"] = json::array();
  for (const auto& r : g.grid.buildings) grid["buildings"].push_back(rect_json(r));
  j["geometry"] = {{"cell_radius", g.cell_radius},
                   {"device_count", g.device_count},
                   {"grid", grid},
                   {"device",
                    {{"battery_capacity_j", g.device.battery_capacity_j},
                     {"max_tx_power_dbm", g.device.max_tx_power_dbm},
                     {"reports_per_day", g.device.reports_per_day},
                     {"packet_bits", g.device.packet_bits},
                     {"antenna_height", g.device.antenna_height}}}};

  const auto& ch = c.channel;
  json table = json::array();
  for (const auto& s : ch.rate_table) table.push_back(json::array({s.snr_db, s.efficiency}));
  j["channel"] = {{"carrier_hz", ch.carrier_hz},
                  {"bandwidth_hz", ch.bandwidth_hz},
                  {"ue_noise_figure_db", ch.ue_noise_figure_db},
                  {"bs_noise_figure_db", ch.bs_noise_figure_db},
                  {"bs_antenna_gain_db", ch.bs_antenna_gain_db},
                  {"bs_tx_power_dbm", ch.bs_tx_power_dbm},
                  {"macro_intercept_db", ch.macro_intercept_db},
                  {"macro_exponent", ch.macro_exponent},
                  {"external_wall_db", ch.external_wall_db},
                  {"interior_wall_db", ch.interior_wall_db},
                  {"interior_wall_spacing_m", ch.interior_wall_spacing_m},
                  {"indoor_intercept_db", ch.indoor_intercept_db},
                  {"indoor_exponent", ch.indoor_exponent},
                  {"floor_loss_db", ch.floor_loss_db},
                  {"outdoor_d2d_intercept_db", ch.outdoor_d2d_intercept_db},
                  {"outdoor_d2d_exponent", ch.outdoor_d2d_exponent},
                  {"shadowing", ch.shadowing},
                  {"cellular_shadow_sigma_db", ch.cellular_shadow_sigma_db},
                  {"d2d_shadow_sigma_db", ch.d2d_shadow_sigma_db},
                  {"rate_model", ch.rate_model == RateModel::Table ? "table" : "shannon"},
                  {"cutoff_snr_db", ch.cutoff_snr_db},
                  {"shannon_efficiency", ch.shannon_efficiency},
                  {"max_efficiency", ch.max_efficiency},
                  {"rate_table", table}};

  j["clustering"] = {{"a_sector", c.clustering.a_sector},
                     {"k", c.clustering.k},
                     {"r_in", c.clustering.r_in},
                     {"snr_threshold_centroid", c.clustering.snr_threshold_centroid}};
  j["tms"] = {{"bl_threshold_days", c.tms.bl_threshold_days},
              {"snr_threshold_db", c.tms.snr_threshold_db},
              {"d2d_pathloss_max_db", c.tms.d2d_pathloss_max_db},
              {"delta_t_s", c.tms.delta_t_s},
              {"relay_criterion", std::string(to_string(c.tms.relay_criterion))},
              {"max_remotes_per_relay", c.tms.max_remotes_per_relay}};
  j["protocol"] = {{"control_bits", c.protocol.control_bits},
                   {"aggregation", c.protocol.aggregation},
                   {"origin", std::string(to_string(c.protocol.origin))},
                   {"d2d_loss_probability", c.protocol.d2d_loss_probability},
                   {"max_retransmissions", c.protocol.max_retransmissions}};
  const auto& p = c.power;
  j["power"] = {{"pa_efficiency", p.pa_efficiency}, {"tx_circuitry_w", p.tx_circuitry_w},
                {"rx_w", p.rx_w},                   {"paging_w", p.paging_w},
                {"paging_s", p.paging_s},           {"clock_w", p.clock_w},
                {"clock_s", p.clock_s},             {"cp_w", p.cp_w},
                {"cp_s", p.cp_s},                   {"sleep_w", p.sleep_w},
                {"drx_per_day", p.drx_per_day},     {"capacity_j", p.capacity_j}};
  j["outputs"] = {{"links", c.outputs.links}, {"trace", c.outputs.trace}, {"environment", c.outputs.environment}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Section top(j, "config");
  top.get("seed", c.seed);
  top.get("simulated_days", c.simulated_days);
  top.get("output_dir", c.output_dir);
  top.get("d2d_enabled", c.d2d_enabled);
  if (const json* m = top.child("methods")) {
    if (!m->is_array()) throw ConfigError("config.methods: expected an array");
    c.methods.clear();
    for (const auto& v : *m) {
      if (!v.is_string()) throw ConfigError("config.methods: expected strings");
      c.methods.push_back(parse_clustering_method(v.get<std::string>()));
    }
  }

  if (const json* gj = top.child("geometry")) {
    Section g(*gj, "geometry");
    g.get("cell_radius", c.geometry.cell_radius);
    g.get("device_count", c.geometry.device_count);
    if (const json* grid = g.child("grid")) {
      Section s(*grid, "geometry.grid");
      auto& gs = c.geometry.grid;
      s.get("width", gs.width);
      s.get("depth", gs.depth);
      s.get("min_floors", gs.min_floors);
      s.get("max_floors", gs.max_floors);
      s.get("floor_height", gs.floor_height);
      s.get("bs_height", gs.bs_height);
      if (const json* park = s.child("park")) gs.park = parse_rect(*park, "geometry.grid.park");
      if (const json* b = s.child("buildings")) {
        if (!b->is_array()) throw ConfigError("geometry.grid.buildings: expected an array");
        gs.buildings.clear();
        for (const auto& r : *b) gs.buildings.push_back(parse_rect(r, "geometry.grid.buildings"));
      }
      s.finish();
    }
    if (const json* dj = g.child("device")) {
      Section s(*dj, "geometry.device");
      auto& d = c.geometry.device;
      s.get("battery_capacity_j", d.battery_capacity_j);
      s.get("max_tx_power_dbm", d.max_tx_power_dbm);
      s.get("reports_per_day", d.reports_per_day);
      s.get("packet_bits", d.packet_bits);
      s.get("antenna_height", d.antenna_height);
      s.finish();
    }
    g.finish();
  }

  if (const json* cj = top.child("channel")) {
    Section s(*cj, "channel");
    auto& ch = c.channel;
    s.get("carrier_hz", ch.carrier_hz);
    s.get("bandwidth_hz", ch.bandwidth_hz);
    s.get("ue_noise_figure_db", ch.ue_noise_figure_db);
    s.get("bs_noise_figure_db", ch.bs_noise_figure_db);
    s.get("bs_antenna_gain_db", ch.bs_antenna_gain_db);
    s.get("bs_tx_power_dbm", ch.bs_tx_power_dbm);
    s.get("macro_intercept_db", ch.macro_intercept_db);
    s.get("macro_exponent", ch.macro_exponent);
    s.get("external_wall_db", ch.external_wall_db);
    s.get("interior_wall_db", ch.interior_wall_db);
    s.get("interior_wall_spacing_m", ch.interior_wall_spacing_m);
    s.get("indoor_intercept_db", ch.indoor_intercept_db);
    s.get("indoor_exponent", ch.indoor_exponent);
    s.get("floor_loss_db", ch.floor_loss_db);
    s.get("outdoor_d2d_intercept_db", ch.outdoor_d2d_intercept_db);
    s.get("outdoor_d2d_exponent", ch.outdoor_d2d_exponent);
    s.get("shadowing", ch.shadowing);
    s.get("cellular_shadow_sigma_db", ch.cellular_shadow_sigma_db);
    s.get("d2d_shadow_sigma_db", ch.d2d_shadow_sigma_db);
    std::string model = ch.rate_model == RateModel::Table ? "table" : "shannon";
    s.get("rate_model", model);
    if (model == "table") {
      ch.rate_model = RateModel::Table;
    } else if (model == "shannon") {
      ch.rate_model = RateModel::Shannon;
    } else {
      throw ConfigError("channel.rate_model: expected 'table' or 'shannon'");
    }
    s.get("cutoff_snr_db", ch.cutoff_snr_db);
    s.get("shannon_efficiency", ch.shannon_efficiency);
    s.get("max_efficiency", ch.max_efficiency);
    if (const json* t = s.child("rate_table")) {
      if (!t->is_array()) throw ConfigError("channel.rate_table: expected an array of [snr_db, efficiency]");
      ch.rate_table.clear();
      for (const auto& row : *t) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
          throw ConfigError("channel.rate_table: expected [snr_db, efficiency] rows");
        ch.rate_table.push_back({row[0].get<double>(), row[1].get<double>()});
      }
    }
    s.finish();
  }

  if (const json* cj = top.child("clustering")) {
    Section s(*cj, "clustering");
    s.get("a_sector", c.clustering.a_sector);
    s.get("k", c.clustering.k);
    s.get("r_in", c.clustering.r_in);
    s.get("snr_threshold_centroid", c.clustering.snr_threshold_centroid);
    s.finish();
  }

  if (const json* tj = top.child("tms")) {
    Section s(*tj, "tms");
    s.get("bl_threshold_days", c.tms.bl_threshold_days);
    s.get("snr_threshold_db", c.tms.snr_threshold_db);
    s.get("d2d_pathloss_max_db", c.tms.d2d_pathloss_max_db);
    s.get("delta_t_s", c.tms.delta_t_s);
    std::string crit(to_string(c.tms.relay_criterion));
    s.get("relay_criterion", crit);
    c.tms.relay_criterion = parse_relay_criterion(crit);
    s.get("max_remotes_per_relay", c.tms.max_remotes_per_relay);
    s.finish();
  }

  if (const json* pj = top.child("protocol")) {
    Section s(*pj, "protocol");
    s.get("control_bits", c.protocol.control_bits);
    s.get("aggregation", c.protocol.aggregation);
    std::string origin(to_string(c.protocol.origin));
    s.get("origin", origin);
    c.protocol.origin = parse_origin(origin);
    s.get("d2d_loss_probability", c.protocol.d2d_loss_probability);
    s.get("max_retransmissions", c.protocol.max_retransmissions);
    s.finish();
  }

  if (const json* pj = top.child("power")) {
    Section s(*pj, "power");
    auto& p = c.power;
    s.get("pa_efficiency", p.pa_efficiency);
    s.get("tx_circuitry_w", p.tx_circuitry_w);
    s.get("rx_w", p.rx_w);
    s.get("paging_w", p.paging_w);
    s.get("paging_s", p.paging_s);
    s.get("clock_w", p.clock_w);
    s.get("clock_s", p.clock_s);
    s.get("cp_w", p.cp_w);
    s.get("cp_s", p.cp_s);
    s.get("sleep_w", p.sleep_w);
    s.get("drx_per_day", p.drx_per_day);
    s.get("capacity_j", p.capacity_j);
    s.finish();
  }

  if (const json* oj = top.child("outputs")) {
    Section s(*oj, "outputs");
    s.get("links", c.outputs.links);
    s.get("trace", c.outputs.trace);
    s.get("environment", c.outputs.environment);
    s.finish();
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::string config_fingerprint(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("outputs");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace mtcd2d
