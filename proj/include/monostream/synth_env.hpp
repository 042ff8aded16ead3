#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "monostream/csi_model.hpp"

namespace monostream {

struct ScenarioConfig {
  int rows = 5;
  int cols = 5;
  double spacing_m = 1.0;
  int n = 3;
  int m = 3;
  int f = 30;
  int clusters_per_link = 2;
  /// Mean level difference between adjacent locations, per link.
  double separation_dB = 4.0;
  double noise_sigma = 2.0;
  std::uint64_t seed = 1;
  /// Per-link override of separation_dB.
  std::map<LinkId, double> link_separation_dB;
};

/// One Gaussian component of a link profile.
struct ClusterModel {
  double weight = 1.0;
  /// Mean magnitude per sub-carrier, dB.
  std::vector<double> base;
  double noise_sigma = 1.0;
};

struct GridLocation {
  int id = 0;
  int row = 0;
  int col = 0;
  Point2 coords;
};

/// Synthetic testbed: a rows x cols fingerprint grid whose links carry
/// Gaussian-mixture CSI profiles that shift smoothly across space.
struct Scenario {
  ScenarioConfig config;
  /// Row-major; id = row * cols + col.
  std::vector<GridLocation> locations;
  std::vector<LinkId> links;
  /// clusters[location][link index] -> mixture components.
  std::vector<std::vector<std::vector<ClusterModel>>> clusters;

  const GridLocation& location(int id) const;
  std::size_t link_index(LinkId link) const;
};

Scenario build_scenario(const ScenarioConfig& config);

/// `count` packets per link with the entity standing at a grid location.
/// Timestamps run 0..count-1; packet t of every link shares timestamp t.
std::vector<CsiPacket> generate_packets(const Scenario& scenario, int location_id, int count,
                                        std::uint64_t seed);

/// Same at an arbitrary coordinate inside the grid: cluster bases are
/// bilinearly interpolated over the enclosing cell, weights and noise come from
/// the nearest grid location. Throws OutOfDomainError outside the grid.
std::vector<CsiPacket> generate_packets(const Scenario& scenario, Point2 where, int count,
                                        std::uint64_t seed);

/// Mixture components an entity at `where` induces on every link.
std::vector<std::vector<ClusterModel>> clusters_at(const Scenario& scenario, Point2 where);

/// Centres of every grid cell.
std::vector<Point2> cell_midpoints(const Scenario& scenario);

/// Mixes a seed with a salt (splitmix64), for deriving independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace monostream
