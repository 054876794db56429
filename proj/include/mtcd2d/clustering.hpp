#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mtcd2d/channel.hpp"
#include "mtcd2d/geometry.hpp"

namespace mtcd2d {

enum class ClusteringMethod { Geometric, KMeans, Distance, DistanceCsi };

std::string_view to_string(ClusteringMethod m);
ClusteringMethod parse_clustering_method(std::string_view s);

/// Annular sector: r_start < R <= r_end, phi_start < phi <= phi_end, phi in (-pi, pi].
struct SectorRegion {
  double r_start = 0.0;
  double r_end = 0.0;
  double phi_start = 0.0;
  double phi_end = 0.0;

  bool contains(Vec2 p) const;
};

struct Cluster {
  int id = 0;
  std::vector<NodeId> members;
  std::optional<NodeId> centroid_device;  // device-centroid methods
  std::optional<Vec2> centroid;
  std::optional<SectorRegion> region;     // geometric method
};

struct ClusteringSpec {
  ClusteringMethod method = ClusteringMethod::Geometric;
  double a_sector = 40000.0;
  int k = 0;  // 0: take the geometric count for a_sector
  double r_in = 100.0;
  double snr_threshold_centroid = 10.0;
  std::uint64_t rng_seed = 0;
};

/// Output of a clustering pass: the clusters plus a dense device -> cluster
/// index (-1 for inner-circle devices).
struct Clustering {
  std::vector<Cluster> clusters;
  std::vector<int> cluster_of;
};

/// Ring layout used by the geometric method: rings of radial width
/// sqrt(a_sector) from r_in outwards, each split into ceil(area / a_sector)
/// equal angular sectors.
std::vector<SectorRegion> geometric_sectors(double cell_radius, double r_in, double a_sector);

int geometric_cluster_count(double cell_radius, double r_in, double a_sector);

/// Devices farther than r_in from the site (horizontal), ascending id.
std::vector<NodeId> eligible_devices(std::span<const Device> devices, double r_in);

Clustering geometric_clustering(std::span<const Device> devices, double cell_radius, const ClusteringSpec& spec);
Clustering kmeans_clustering(std::span<const Device> devices, const ClusteringSpec& spec);
Clustering distance_clustering(std::span<const Device> devices, const ClusteringSpec& spec);
Clustering distance_csi_clustering(std::span<const Device> devices, std::span<const RadioLink> cellular,
                                   const ClusteringSpec& spec);

/// Dispatch on spec.method. `cellular` is only read by DistanceCsi.
Clustering run_clustering(std::span<const Device> devices, std::span<const RadioLink> cellular,
                          double cell_radius, const ClusteringSpec& spec);

}  // namespace mtcd2d
