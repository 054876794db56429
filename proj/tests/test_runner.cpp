#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sys/wait.h>

#include "doctest.h"
#include "mtcd2d/config.hpp"
#include "mtcd2d/io.hpp"
#include "mtcd2d/runner.hpp"
#include "support.hpp"

using namespace mtcd2d;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.geometry.device_count = 2000;
  c.output_dir = out.string();
  c.outputs.links = true;
  c.outputs.trace = true;
  c.outputs.environment = true;
  return c;
}

const std::vector<std::optional<ClusteringMethod>> kAll{std::nullopt, ClusteringMethod::Geometric,
                                                         ClusteringMethod::KMeans, ClusteringMethod::Distance,
                                                         ClusteringMethod::DistanceCsi};

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(MTCSIM_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config: JSON round trip and fingerprint") {
  RunConfig c;
  c.seed = 42;
  c.clustering.a_sector = 2500.0;
  c.methods = {ClusteringMethod::KMeans, ClusteringMethod::DistanceCsi};
  c.channel.rate_model = RateModel::Shannon;
  c.protocol.origin = TrafficOrigin::MobileTerminated;
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_fingerprint(back) == config_fingerprint(c));
  CHECK(config_fingerprint(c).size() == 16);

  RunConfig moved = c;
  moved.output_dir = "elsewhere";
  CHECK(config_fingerprint(moved) == config_fingerprint(c));
  RunConfig other = c;
  other.seed = 43;
  CHECK(config_fingerprint(other) != config_fingerprint(c));
}

TEST_CASE("config: partial documents keep defaults, unknown keys rejected") {
  const auto c = config_from_json(nlohmann::json::parse(R"({"seed": 9, "tms": {"snr_threshold_db": 4.5}})"));
  CHECK(c.seed == 9);
  CHECK(c.tms.snr_threshold_db == 4.5);
  CHECK(c.tms.d2d_pathloss_max_db == 136.0);
  CHECK(c.geometry.cell_radius == 866.0);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sed": 9})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"tms": {"bl": 1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"clustering": {"method": "spectral"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
}

TEST_CASE("config: validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.simulated_days = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.clustering.r_in = 900.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.power.pa_efficiency = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.tms.delta_t_s = -1.0;
  CHECK_THROWS_AS(prepare_scenario(c), ConfigError);
}

TEST_CASE("io: environment round trip") {
  const auto env = build_environment(GridSpec::madrid(), 866.0, 3);
  const auto devs = deploy_devices(env, 50, 4);
  const auto j = environment_to_json(env, devs);
  const auto env2 = environment_from_json(j);
  const auto devs2 = devices_from_json(j);
  REQUIRE(env2.buildings.size() == env.buildings.size());
  for (std::size_t i = 0; i < env.buildings.size(); ++i) {
    CHECK(env2.buildings[i].footprint == env.buildings[i].footprint);
    CHECK(env2.buildings[i].floors == env.buildings[i].floors);
  }
  CHECK(env2.bs_position == env.bs_position);
  REQUIRE(devs2.size() == devs.size());
  for (std::size_t i = 0; i < devs.size(); ++i) {
    CHECK(devs2[i].position == devs[i].position);
    CHECK(devs2[i].building_id == devs[i].building_id);
    CHECK(devs2[i].floor_index == devs[i].floor_index);
  }
  CHECK(environment_to_json(env2, devs2).dump() == j.dump());
}

TEST_CASE("runner: byte-identical artifacts for the same config and seed") {
  const auto a = testing::scratch_dir("det_a");
  const auto b = testing::scratch_dir("det_b");
  compare_methods(small_config(a), kAll);
  compare_methods(small_config(b), kAll);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    REQUIRE(fs::exists(b / rel));
    CHECK_MESSAGE(testing::slurp(e.path()) == testing::slurp(b / rel), rel.string());
    ++files;
  }
  CHECK(files >= 5 * 9 + 1);
  for (const char* name : {"summary.json", "cdf_battery.csv", "devices.csv", "clusters.csv", "assignments.csv",
                           "energy.csv", "links.csv", "trace.csv", "environment.json"})
    CHECK(fs::exists(a / "geometric" / name));
  CHECK(fs::exists(a / "comparison.csv"));
}

TEST_CASE("runner: single method table equals run_scenario") {
  const auto a = testing::scratch_dir("single_a");
  const auto b = testing::scratch_dir("single_b");
  auto cfg = small_config(a);
  cfg.methods = {ClusteringMethod::Distance};
  const auto one = run_scenario(cfg);
  const std::vector<std::optional<ClusteringMethod>> m{ClusteringMethod::Distance};
  auto cfg2 = small_config(b);
  cfg2.methods = {ClusteringMethod::Distance};
  const auto table = compare_methods(cfg2, m);
  REQUIRE(table.size() == 1);
  CHECK(summary_to_json(table[0]) == summary_to_json(one));
  CHECK(testing::slurp(a / "devices.csv") == testing::slurp(b / "distance" / "devices.csv"));
}

TEST_CASE("runner: every method uses the geometric cluster count") {
  const auto dir = testing::scratch_dir("fair");
  const auto rows = compare_methods(small_config(dir), kAll);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].cluster_count == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].cluster_count == rows[1].cluster_count);
  CHECK(rows[1].cluster_count == 60);
}

TEST_CASE("runner: pipeline invariants on a small scenario") {
  auto cfg = small_config(testing::scratch_dir("inv"));
  cfg.simulated_days = 2.0;
  const auto s = prepare_scenario(cfg);
  for (auto m : {std::optional<ClusteringMethod>{}, std::optional<ClusteringMethod>{ClusteringMethod::KMeans}}) {
    const auto run = run_method(s, m);
    REQUIRE(run.assignments.size() == s.devices.size());
    for (const auto& a : run.assignments) {
      if (a.mode == Mode::Remote) {
        REQUIRE(a.paired_relay);
        CHECK(run.assignments[*a.paired_relay].mode == Mode::Relay);
        CHECK(d2d_pathloss(s.env, s.devices[a.device_id], s.devices[*a.paired_relay], s.channel) <= 136.0);
        CHECK(run.clustering.cluster_of[a.device_id] == run.clustering.cluster_of[*a.paired_relay]);
      } else {
        CHECK_FALSE(a.paired_relay);
      }
      if (a.mode == Mode::Cellular || a.mode == Mode::Relay) CHECK(s.uplink[a.device_id].rate_bps > 0.0);
      if (a.mode == Mode::Unreachable) CHECK(s.uplink[a.device_id].rate_bps == 0.0);
    }
    for (const auto& r : run.reports) {
      double sum = 0.0;
      for (double v : r.breakdown) sum += v;
      CHECK(sum == doctest::Approx(r.energy_per_day_j).epsilon(1e-9));
    }
    CHECK(run.traffic.generated == run.traffic.delivered + run.traffic.failed);
    CHECK(run.summary.availability >= 0.0);
    CHECK(run.summary.availability <= 1.0);
  }
}

TEST_CASE("runner: golden mode histogram for the default scenario") {
  RunConfig cfg;
  cfg.output_dir = testing::scratch_dir("golden").string();
  const auto s = prepare_scenario(cfg);
  const auto base = run_method(s, std::nullopt);
  const auto geo = run_method(s, ClusteringMethod::Geometric);
  CHECK(base.summary.mode_counts == std::array<std::size_t, 4>{17646, 0, 0, 2354});
  CHECK(geo.summary.mode_counts == std::array<std::size_t, 4>{14832, 1578, 3586, 4});
  // D2D lifts the low-life tail: fewer devices below every point of the baseline's lower decile
  const auto& bc = base.summary.cdf_points;
  const auto& gc = geo.summary.cdf_points;
  for (std::size_t i = 0; i < bc.size() / 10; i += 50) {
    const double t = bc[i].days;
    const auto below = [t](const std::vector<CdfPoint>& c) {
      return std::count_if(c.begin(), c.end(), [t](const CdfPoint& p) { return p.days < t; });
    };
    CHECK(below(gc) <= below(bc));
  }
}

TEST_CASE("cli: exit codes") {
  const auto dir = testing::scratch_dir("cli");
  CHECK(run_cli("--devices 500 --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "summary.json"));
  CHECK(run_cli("--method spectral --out " + dir.string()) == 2);
  CHECK(run_cli("--days 0 --out " + dir.string()) == 2);
  CHECK(run_cli("--config /nonexistent.json") == 2);
  testing::scratch_dir("cli_cfg");
  const auto bad = dir / "bad.json";
  { std::ofstream(bad) << R"({"tms": {"unknown": 1}})"; }
  CHECK(run_cli("--config " + bad.string()) == 2);
  CHECK(run_cli("--a-sector 9e9 --devices 500 --out " + dir.string()) == 2);
}
