#include "mtcd2d/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "mtcd2d/rng.hpp"

namespace mtcd2d {

std::string_view to_string(ClusteringMethod m) {
  switch (m) {
    case ClusteringMethod::Geometric: return "geometric";
    case ClusteringMethod::KMeans: return "kmeans";
    case ClusteringMethod::Distance: return "distance";
    case ClusteringMethod::DistanceCsi: return "distance-csi";
  }
  return "?";
}

ClusteringMethod parse_clustering_method(std::string_view s) {
  if (s == "geometric") return ClusteringMethod::Geometric;
  if (s == "kmeans") return ClusteringMethod::KMeans;
  if (s == "distance") return ClusteringMethod::Distance;
  if (s == "distance-csi") return ClusteringMethod::DistanceCsi;
  throw ConfigError("clustering: unknown method '" + std::string(s) + "'");
}

namespace {

constexpr double kPi = std::numbers::pi;

double polar_angle(Vec2 p) {
  double phi = std::atan2(p.y, p.x);
  if (phi <= -kPi) phi = kPi;  // atan2(-0, -x) == -pi
  return phi;
}

struct Ring {
  double r_start;
  double r_end;
  int sectors;
  int first_cluster;
};

std::vector<Ring> ring_layout(double cell_radius, double r_in, double a_sector) {
  if (!(a_sector > 0.0)) throw ConfigError("clustering: a_sector must be positive");
  if (!(r_in >= 0.0) || !(r_in < cell_radius)) throw ConfigError("clustering: need 0 <= r_in < cell_radius");
  const double annulus = kPi * (cell_radius * cell_radius - r_in * r_in);
  if (a_sector > annulus) throw ConfigError("clustering: a_sector exceeds the annulus area");

  const double width = std::sqrt(a_sector);
  const int rings = std::max(1, static_cast<int>(std::ceil((cell_radius - r_in) / width - 1e-12)));
  std::vector<Ring> out;
  int next = 0;
  for (int i = 0; i < rings; ++i) {
    const double r0 = r_in + i * width;
    const double r1 = (i + 1 == rings) ? cell_radius : r_in + (i + 1) * width;
    const double area = kPi * (r1 * r1 - r0 * r0);
    const int m = std::max(1, static_cast<int>(std::ceil(area / a_sector - 1e-12)));
    out.push_back({r0, r1, m, next});
    next += m;
  }
  return out;
}

std::unordered_map<NodeId, const Device*> index_by_id(std::span<const Device> devices) {
  std::unordered_map<NodeId, const Device*> out;
  out.reserve(devices.size());
  for (const auto& d : devices) {
    if (!out.emplace(d.id, &d).second) throw ConfigError("clustering: duplicate device id");
  }
  return out;
}

std::size_t id_span(std::span<const Device> devices) {
  std::size_t n = 0;
  for (const auto& d : devices) n = std::max<std::size_t>(n, static_cast<std::size_t>(d.id) + 1);
  return n;
}

// Nearest centroid by horizontal distance, ties to the lower cluster id.
int nearest_centroid(Vec2 p, const std::vector<Vec2>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double dx = p.x - centroids[c].x;
    const double dy = p.y - centroids[c].y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d) {
      best_d = d2;
      best = static_cast<int>(c);
    }
  }
  return best;
}

void check_k(int k, std::size_t eligible) {
  if (k < 1) throw ConfigError("clustering: k must be at least 1");
  if (static_cast<std::size_t>(k) > eligible)
    throw ConfigError("clustering: k exceeds the number of eligible devices");
}

// Fixed centroids, every eligible device joins its nearest one.
Clustering assign_to_fixed(std::span<const Device> devices, const std::vector<NodeId>& eligible,
                           const std::vector<NodeId>& centroid_ids) {
  const auto by_id = index_by_id(devices);
  Clustering out;
  out.cluster_of.assign(id_span(devices), -1);
  std::vector<Vec2> centroids;
  for (std::size_t c = 0; c < centroid_ids.size(); ++c) {
    const Vec2 p = by_id.at(centroid_ids[c])->position.horizontal();
    centroids.push_back(p);
    Cluster cl;
    cl.id = static_cast<int>(c);
    cl.centroid_device = centroid_ids[c];
    cl.centroid = p;
    out.clusters.push_back(std::move(cl));
  }
  for (NodeId id : eligible) {
    const int c = nearest_centroid(by_id.at(id)->position.horizontal(), centroids);
    out.clusters[static_cast<std::size_t>(c)].members.push_back(id);
    out.cluster_of[id] = c;
  }
  return out;
}

std::vector<NodeId> sample_without_replacement(std::vector<NodeId> pool, int k, std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const auto remaining = static_cast<std::uint64_t>(pool.size()) - static_cast<std::uint64_t>(i);
    const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.below(remaining));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace

bool SectorRegion::contains(Vec2 p) const {
  const double r = norm(p);
  const double phi = polar_angle(p);
  return r > r_start && r <= r_end && phi > phi_start && phi <= phi_end;
}

std::vector<SectorRegion> geometric_sectors(double cell_radius, double r_in, double a_sector) {
  std::vector<SectorRegion> out;
  for (const auto& ring : ring_layout(cell_radius, r_in, a_sector)) {
    const double step = 2.0 * kPi / ring.sectors;
    for (int j = 0; j < ring.sectors; ++j) {
      const double lo = -kPi + j * step;
      const double hi = (j + 1 == ring.sectors) ? kPi : -kPi + (j + 1) * step;
      out.push_back({ring.r_start, ring.r_end, lo, hi});
    }
  }
  return out;
}

int geometric_cluster_count(double cell_radius, double r_in, double a_sector) {
  int n = 0;
  for (const auto& ring : ring_layout(cell_radius, r_in, a_sector)) n += ring.sectors;
  return n;
}

std::vector<NodeId> eligible_devices(std::span<const Device> devices, double r_in) {
  std::vector<NodeId> out;
  for (const auto& d : devices) {
    if (norm(d.position.horizontal()) > r_in) out.push_back(d.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Clustering geometric_clustering(std::span<const Device> devices, double cell_radius, const ClusteringSpec& spec) {
  const auto rings = ring_layout(cell_radius, spec.r_in, spec.a_sector);
  const auto regions = geometric_sectors(cell_radius, spec.r_in, spec.a_sector);

  Clustering out;
  out.cluster_of.assign(id_span(devices), -1);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    Cluster c;
    c.id = static_cast<int>(i);
    c.region = regions[i];
    out.clusters.push_back(std::move(c));
  }

  const auto by_id = index_by_id(devices);
  const double width = std::sqrt(spec.a_sector);
  const auto ring_count = static_cast<int>(rings.size());
  for (NodeId id : eligible_devices(devices, spec.r_in)) {
    const Vec2 p = by_id.at(id)->position.horizontal();
    const double r = norm(p);
    if (r > cell_radius) throw ContractViolation("clustering", "device outside the cell radius");

    int ri = std::clamp(static_cast<int>(std::ceil((r - spec.r_in) / width)) - 1, 0, ring_count - 1);
    while (ri > 0 && r <= rings[static_cast<std::size_t>(ri)].r_start) --ri;
    while (ri + 1 < ring_count && r > rings[static_cast<std::size_t>(ri)].r_end) ++ri;
    const auto& ring = rings[static_cast<std::size_t>(ri)];

    const double phi = polar_angle(p);
    const double step = 2.0 * kPi / ring.sectors;
    int sj = std::clamp(static_cast<int>(std::ceil((phi + kPi) / step)) - 1, 0, ring.sectors - 1);
    while (sj > 0 && !(phi > regions[static_cast<std::size_t>(ring.first_cluster + sj)].phi_start)) --sj;
    while (sj + 1 < ring.sectors && phi > regions[static_cast<std::size_t>(ring.first_cluster + sj)].phi_end) ++sj;

    const int c = ring.first_cluster + sj;
    out.clusters[static_cast<std::size_t>(c)].members.push_back(id);
    out.cluster_of[id] = c;
  }
  return out;
}

Clustering kmeans_clustering(std::span<const Device> devices, const ClusteringSpec& spec) {
  const auto eligible = eligible_devices(devices, spec.r_in);
  check_k(spec.k, eligible.size());
  const auto by_id = index_by_id(devices);
  auto pos = [&](NodeId id) { return by_id.at(id)->position.horizontal(); };

  // Greedy farthest-point seeding: the device farthest from the site, then
  // repeatedly the device maximising its distance to the chosen set.
  std::vector<NodeId> seeds;
  std::vector<double> min_d(eligible.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(eligible.size(), false);
  {
    std::size_t first = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      const double r = norm(pos(eligible[i]));
      if (r > best) {
        best = r;
        first = i;
      }
    }
    seeds.push_back(eligible[first]);
    chosen[first] = true;
  }
  while (seeds.size() < static_cast<std::size_t>(spec.k)) {
    const Vec2 last = pos(seeds.back());
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      if (chosen[i]) continue;
      min_d[i] = std::min(min_d[i], distance(pos(eligible[i]), last));
      if (min_d[i] > best) {
        best = min_d[i];
        pick = i;
      }
    }
    seeds.push_back(eligible[pick]);
    chosen[pick] = true;
  }

  Clustering out;
  out.cluster_of.assign(id_span(devices), -1);
  std::vector<Vec2> centroids;
  std::vector<Vec2> sums;
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    Cluster cl;
    cl.id = static_cast<int>(c);
    cl.members.push_back(seeds[c]);
    out.cluster_of[seeds[c]] = static_cast<int>(c);
    centroids.push_back(pos(seeds[c]));
    sums.push_back(pos(seeds[c]));
    cl.centroid_device = seeds[c];
    out.clusters.push_back(std::move(cl));
  }

  // Single pass in ascending id: join the nearest centroid, then move that
  // cluster's centroid to the member closest to the members' mean.
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    if (chosen[i]) continue;
    const NodeId id = eligible[i];
    const Vec2 p = pos(id);
    const int c = nearest_centroid(p, centroids);
    auto& cl = out.clusters[static_cast<std::size_t>(c)];
    cl.members.push_back(id);
    out.cluster_of[id] = c;
    auto& s = sums[static_cast<std::size_t>(c)];
    s.x += p.x;
    s.y += p.y;
    const double n = static_cast<double>(cl.members.size());
    const Vec2 mean{s.x / n, s.y / n};
    NodeId best_id = cl.members.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (NodeId m : cl.members) {
      const double d = distance(pos(m), mean);
      if (d < best_d || (d == best_d && m < best_id)) {
        best_d = d;
        best_id = m;
      }
    }
    cl.centroid_device = best_id;
    centroids[static_cast<std::size_t>(c)] = pos(best_id);
  }
  for (auto& cl : out.clusters) cl.centroid = pos(*cl.centroid_device);
  return out;
}

Clustering distance_clustering(std::span<const Device> devices, const ClusteringSpec& spec) {
  const auto eligible = eligible_devices(devices, spec.r_in);
  check_k(spec.k, eligible.size());
  return assign_to_fixed(devices, eligible, sample_without_replacement(eligible, spec.k, spec.rng_seed));
}

Clustering distance_csi_clustering(std::span<const Device> devices, std::span<const RadioLink> cellular,
                                   const ClusteringSpec& spec) {
  const auto eligible = eligible_devices(devices, spec.r_in);
  check_k(spec.k, eligible.size());
  std::unordered_map<NodeId, double> snr;
  for (const auto& l : cellular) snr[l.tx_id] = l.snr_db;
  std::vector<NodeId> candidates;
  for (NodeId id : eligible) {
    const auto it = snr.find(id);
    if (it == snr.end()) throw ContractViolation("clustering", "eligible device without a cellular link");
    if (it->second > spec.snr_threshold_centroid) candidates.push_back(id);
  }
  if (candidates.size() < static_cast<std::size_t>(spec.k))
    throw ConfigError("clustering: fewer centroid candidates above the SNR threshold than k");
  return assign_to_fixed(devices, eligible, sample_without_replacement(candidates, spec.k, spec.rng_seed));
}

Clustering run_clustering(std::span<const Device> devices, std::span<const RadioLink> cellular,
                          double cell_radius, const ClusteringSpec& spec) {
  ClusteringSpec s = spec;
  if (s.k == 0) s.k = geometric_cluster_count(cell_radius, s.r_in, s.a_sector);
  switch (s.method) {
    case ClusteringMethod::Geometric: return geometric_clustering(devices, cell_radius, s);
    case ClusteringMethod::KMeans: return kmeans_clustering(devices, s);
    case ClusteringMethod::Distance: return distance_clustering(devices, s);
    case ClusteringMethod::DistanceCsi: return distance_csi_clustering(devices, cellular, s);
  }
  throw ConfigError("clustering: unknown method");
}

}  // namespace mtcd2d
