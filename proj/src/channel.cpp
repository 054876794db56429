#include "mtcd2d/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtcd2d/rng.hpp"

namespace mtcd2d {

std::vector<RateStep> ChannelParams::default_rate_table() {
  // LTE CQI efficiencies at their usual 10% BLER thresholds, first step
  // pulled down to the -7 dB cutoff and the top clipped at 4.8 bit/s/Hz.
  return {{-7.0, 0.1523}, {-4.7, 0.2344}, {-2.3, 0.3770}, {0.2, 0.6016}, {2.4, 0.8770},
          {4.3, 1.1758},  {5.9, 1.4766},  {8.1, 1.9141},  {10.3, 2.4063}, {11.7, 2.7305},
          {14.1, 3.3223}, {16.3, 3.9023}, {18.7, 4.5234}, {21.0, 4.8}};
}

double free_space_loss_db(double distance_m, double carrier_hz) {
  constexpr double c = 299792458.0;
  const double d = std::max(distance_m, 1.0);
  return 20.0 * std::log10(4.0 * std::numbers::pi * d * carrier_hz / c);
}

namespace {

double log_distance(double intercept, double exponent, double d) {
  return intercept + 10.0 * exponent * std::log10(std::max(d, 1.0));
}

double interior_walls_db(const Environment& env, const Device& dev, const ChannelParams& p) {
  if (dev.building_id < 0) return 0.0;
  const double depth = indoor_depth(env.buildings.at(static_cast<std::size_t>(dev.building_id)), dev.position.horizontal());
  return p.interior_wall_db * std::floor(depth / p.interior_wall_spacing_m);
}

}  // namespace

double shadowing_db(std::uint64_t seed, NodeId a, NodeId b, double sigma_db) {
  const NodeId lo = std::min(a, b);
  const NodeId hi = std::max(a, b);
  const std::uint64_t key = mix64(seed ^ mix64((static_cast<std::uint64_t>(lo) << 32) | hi));
  Rng rng(key);
  return sigma_db * rng.normal();
}

double cellular_pathloss(const Environment& env, const Device& dev, const ChannelParams& p) {
  const double d = distance(dev.position, env.bs_position);
  double loss = std::max(free_space_loss_db(d, p.carrier_hz), log_distance(p.macro_intercept_db, p.macro_exponent, d));
  loss += p.external_wall_db + interior_walls_db(env, dev, p);
  if (p.shadowing) loss += shadowing_db(p.shadow_seed, dev.id, kBaseStation, p.cellular_shadow_sigma_db);
  return loss;
}

D2DScenario classify_d2d(const Device& a, const Device& b) {
  if (a.building_id != b.building_id) return D2DScenario::DifferentBuildings;
  return a.floor_index == b.floor_index ? D2DScenario::SameFloorSameBuilding : D2DScenario::DifferentFloorSameBuilding;
}

double d2d_pathloss(const Environment& env, const Device& a, const Device& b, const ChannelParams& p) {
  const double d = distance(a.position, b.position);
  const double fspl = free_space_loss_db(d, p.carrier_hz);
  double loss = 0.0;
  switch (classify_d2d(a, b)) {
    case D2DScenario::SameFloorSameBuilding:
      loss = std::max(fspl, log_distance(p.indoor_intercept_db, p.indoor_exponent, d));
      break;
    case D2DScenario::DifferentFloorSameBuilding:
      loss = std::max(fspl, log_distance(p.indoor_intercept_db, p.indoor_exponent, d)) +
             p.floor_loss_db * std::abs(a.floor_index - b.floor_index);
      break;
    case D2DScenario::DifferentBuildings:
      loss = std::max(fspl, log_distance(p.outdoor_d2d_intercept_db, p.outdoor_d2d_exponent, d)) +
             2.0 * p.external_wall_db + interior_walls_db(env, a, p) + interior_walls_db(env, b, p);
      break;
  }
  if (p.shadowing) loss += shadowing_db(p.shadow_seed, a.id, b.id, p.d2d_shadow_sigma_db);
  return loss;
}

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("channel: bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double link_snr(double pathloss_db, double tx_power_dbm, double bandwidth_hz, double noise_figure_db) {
  return tx_power_dbm - pathloss_db - noise_floor_dbm(bandwidth_hz, noise_figure_db);
}

double snr_to_rate(double snr_db, double bandwidth_hz, const ChannelParams& p) {
  if (!(snr_db >= p.cutoff_snr_db)) return 0.0;
  double eff = 0.0;
  if (p.rate_model == RateModel::Shannon) {
    eff = p.shannon_efficiency * std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
  } else {
    for (const auto& step : p.rate_table) {
      if (snr_db >= step.snr_db) eff = std::max(eff, step.efficiency);
    }
  }
  return bandwidth_hz * std::min(eff, p.max_efficiency);
}

RadioLink cellular_link(const Environment& env, const Device& dev, const ChannelParams& p) {
  RadioLink l;
  l.tx_id = dev.id;
  l.rx_id = kBaseStation;
  l.pathloss_db = cellular_pathloss(env, dev, p);
  l.snr_db = link_snr(l.pathloss_db - p.bs_antenna_gain_db, dev.max_tx_power_dbm, p.bandwidth_hz, p.bs_noise_figure_db);
  l.rate_bps = snr_to_rate(l.snr_db, p.bandwidth_hz, p);
  return l;
}

RadioLink downlink(const Environment& env, const Device& dev, const ChannelParams& p) {
  RadioLink l;
  l.tx_id = kBaseStation;
  l.rx_id = dev.id;
  l.pathloss_db = cellular_pathloss(env, dev, p);
  l.snr_db = link_snr(l.pathloss_db - p.bs_antenna_gain_db, p.bs_tx_power_dbm, p.bandwidth_hz, p.ue_noise_figure_db);
  l.rate_bps = snr_to_rate(l.snr_db, p.bandwidth_hz, p);
  return l;
}

RadioLink d2d_link(const Environment& env, const Device& tx, const Device& rx, const ChannelParams& p) {
  RadioLink l;
  l.tx_id = tx.id;
  l.rx_id = rx.id;
  l.pathloss_db = d2d_pathloss(env, tx, rx, p);
  l.snr_db = link_snr(l.pathloss_db, tx.max_tx_power_dbm, p.bandwidth_hz, p.ue_noise_figure_db);
  l.rate_bps = snr_to_rate(l.snr_db, p.bandwidth_hz, p);
  return l;
}

std::vector<RadioLink> cellular_links(const Environment& env, const std::vector<Device>& devices,
                                      const ChannelParams& p) {
  std::vector<RadioLink> out;
  out.reserve(devices.size());
  for (const auto& d : devices) out.push_back(cellular_link(env, d, p));
  return out;
}

}  // namespace mtcd2d
