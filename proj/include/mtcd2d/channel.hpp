#pragma once

#include <cstdint>
#include <vector>

#include "mtcd2d/geometry.hpp"

namespace mtcd2d {

struct RateStep {
  double snr_db;       // lower edge of the step
  double efficiency;   // bits/s/Hz
};

enum class RateModel { Table, Shannon };

/// Link-level parameters. Everything the propagation model does is driven
/// from here; the defaults are documented in docs/channel_model.md.
struct ChannelParams {
  double carrier_hz = 900e6;
  double bandwidth_hz = 180e3;
  double ue_noise_figure_db = 5.0;
  double bs_noise_figure_db = 3.0;
  double bs_antenna_gain_db = 0.0;
  double bs_tx_power_dbm = 46.0;

  // Outdoor macro segment: intercept + 10*exponent*log10(d / 1 m).
  double macro_intercept_db = 8.1;
  double macro_exponent = 3.76;

  double external_wall_db = 20.0;
  double interior_wall_db = 2.0;
  double interior_wall_spacing_m = 4.0;

  // Indoor D2D: intercept + 10*exponent*log10(d / 1 m), plus floor losses.
  double indoor_intercept_db = 31.1;
  double indoor_exponent = 3.3;
  double floor_loss_db = 12.0;

  // Street-level UE-to-UE segment between two buildings.
  double outdoor_d2d_intercept_db = 21.5;
  double outdoor_d2d_exponent = 3.67;

  bool shadowing = false;
  double cellular_shadow_sigma_db = 7.0;
  double d2d_shadow_sigma_db = 4.0;
  std::uint64_t shadow_seed = 0;

  RateModel rate_model = RateModel::Table;
  double cutoff_snr_db = -7.0;
  double shannon_efficiency = 0.75;
  double max_efficiency = 4.8;
  std::vector<RateStep> rate_table = default_rate_table();

  static std::vector<RateStep> default_rate_table();
};

struct RadioLink {
  NodeId tx_id = 0;
  NodeId rx_id = 0;
  double pathloss_db = 0.0;
  double snr_db = 0.0;
  double rate_bps = 0.0;
};

enum class D2DScenario { SameFloorSameBuilding, DifferentFloorSameBuilding, DifferentBuildings };

double free_space_loss_db(double distance_m, double carrier_hz);

/// Device-to-site loss: outdoor macro segment, exterior wall, interior walls
/// between the device and the facade, optional shadowing.
double cellular_pathloss(const Environment& env, const Device& dev, const ChannelParams& p);

D2DScenario classify_d2d(const Device& a, const Device& b);

/// Symmetric in (a, b).
double d2d_pathloss(const Environment& env, const Device& a, const Device& b, const ChannelParams& p);

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db);

double link_snr(double pathloss_db, double tx_power_dbm, double bandwidth_hz, double noise_figure_db);

double snr_to_rate(double snr_db, double bandwidth_hz, const ChannelParams& p);

/// Lognormal shadowing term for a link; pure function of (seed, endpoints).
/// Endpoint order does not matter.
double shadowing_db(std::uint64_t seed, NodeId a, NodeId b, double sigma_db);

/// Uplink device -> site.
RadioLink cellular_link(const Environment& env, const Device& dev, const ChannelParams& p);

/// Downlink site -> device; used for control and acknowledgement durations.
RadioLink downlink(const Environment& env, const Device& dev, const ChannelParams& p);

RadioLink d2d_link(const Environment& env, const Device& tx, const Device& rx, const ChannelParams& p);

std::vector<RadioLink> cellular_links(const Environment& env, const std::vector<Device>& devices,
                                      const ChannelParams& p);

}  // namespace mtcd2d
