// Command-line front end: one run, or a baseline-plus-methods comparison.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "mtcd2d/config.hpp"
#include "mtcd2d/runner.hpp"

using namespace mtcd2d;

namespace {

void print_summary(const RunSummary& s) {
  fmt::print("{:<13} availability={:.4f} frac_10y={:.4f} clusters={} cellular={} relay={} remote={} unreachable={}\n",
             s.label, s.availability, s.frac_meeting_10y, s.cluster_count, s.mode_counts[0], s.mode_counts[1],
             s.mode_counts[2], s.mode_counts[3]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MTC D2D cluster simulator"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string method;
  std::optional<double> a_sector;
  std::optional<double> days;
  std::optional<std::size_t> devices;
  std::string out;
  bool baseline = false;
  bool links = false;
  bool trace = false;
  bool environment = false;
  bool print_config = false;

  app.add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("-s,--seed", seed, "master seed");
  app.add_option("-m,--method", method, "geometric | kmeans | distance | distance-csi | all");
  app.add_option("--a-sector", a_sector, "sector area in m^2");
  app.add_option("--days", days, "simulated days");
  app.add_option("-n,--devices", devices, "number of devices");
  app.add_option("-o,--out", out, "output directory");
  app.add_flag("--baseline", baseline, "disable D2D");
  app.add_flag("--links", links, "write links.csv");
  app.add_flag("--trace", trace, "write trace.csv for the last interval");
  app.add_flag("--environment", environment, "write environment.json");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (a_sector) cfg.clustering.a_sector = *a_sector;
    if (days) cfg.simulated_days = *days;
    if (devices) cfg.geometry.device_count = *devices;
    if (!out.empty()) cfg.output_dir = out;
    if (baseline) cfg.d2d_enabled = false;
    cfg.outputs.links = cfg.outputs.links || links;
    cfg.outputs.trace = cfg.outputs.trace || trace;
    cfg.outputs.environment = cfg.outputs.environment || environment;

    if (!method.empty() && method != "all") cfg.methods = {parse_clustering_method(method)};
    if (print_config) {
      cfg.validate();
      std::printf("%s\n", to_json(cfg).dump(2).c_str());
      return 0;
    }

    if (method == "all") {
      std::vector<std::optional<ClusteringMethod>> runs{std::nullopt};
      for (auto m : {ClusteringMethod::Geometric, ClusteringMethod::KMeans, ClusteringMethod::Distance,
                     ClusteringMethod::DistanceCsi})
        runs.emplace_back(m);
      for (const auto& s : compare_methods(cfg, runs)) print_summary(s);
      return 0;
    }
    print_summary(run_scenario(cfg));
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ContractViolation& e) {
    std::fprintf(stderr, "contract violation: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
