#include "monostream/synth_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "monostream/errors.hpp"

namespace monostream {

namespace {

constexpr double kDomainSlack = 1e-9;

// Linear field over the grid with unit mean absolute step between neighbours.
struct SpatialField {
  double dx = 0.0;
  double dy = 0.0;

  static SpatialField random(std::mt19937_64& rng, double step) {
    const double angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double norm = 2.0 / (std::abs(c) + std::abs(s));
    return {step * c * norm, step * s * norm};
  }

  double at(double col, double row, double centre_col, double centre_row) const {
    return dx * (col - centre_col) + dy * (row - centre_row);
  }
};

void validate(const ScenarioConfig& c) {
  if (c.rows < 1 || c.cols < 1 || c.rows * c.cols < 2) {
    throw ConfigError("scenario grid needs at least two locations");
  }
  if (!(c.spacing_m > 0.0)) throw ConfigError("grid spacing must be positive");
  if (c.n < 1 || c.m < 1) throw ConfigError("antenna counts must be >= 1");
  if (c.f < 1) throw ConfigError("sub-carrier count must be >= 1");
  if (c.clusters_per_link < 1 || c.clusters_per_link > 3) {
    throw ConfigError("clusters per link must be 1..3");
  }
  if (!(c.separation_dB >= 0.0)) throw ConfigError("separation must be >= 0");
  if (!(c.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  for (const auto& [link, sep] : c.link_separation_dB) {
    if (!(sep >= 0.0)) throw ConfigError("separation override must be >= 0");
    if (link.tx < 0 || link.tx >= c.n || link.rx < 0 || link.rx >= c.m) {
      throw ConfigError("separation override names unknown link " + to_string(link));
    }
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const GridLocation& Scenario::location(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= locations.size()) {
    throw OutOfDomainError("unknown grid location " + std::to_string(id));
  }
  return locations[static_cast<std::size_t>(id)];
}

std::size_t Scenario::link_index(LinkId link) const {
  auto it = std::lower_bound(links.begin(), links.end(), link);
  if (it == links.end() || *it != link) throw MissingLinkError("unknown link " + to_string(link));
  return static_cast<std::size_t>(it - links.begin());
}

Scenario build_scenario(const ScenarioConfig& config) {
  validate(config);
  Scenario sc;
  sc.config = config;
  sc.links = all_links(config.n, config.m);

  for (int r = 0; r < config.rows; ++r) {
    for (int c = 0; c < config.cols; ++c) {
      sc.locations.push_back({r * config.cols + c, r, c,
                              {c * config.spacing_m, r * config.spacing_m}});
    }
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double centre_col = 0.5 * (config.cols - 1);
  const double centre_row = 0.5 * (config.rows - 1);
  const std::size_t f = static_cast<std::size_t>(config.f);
  const std::size_t n_links = sc.links.size();

  sc.clusters.assign(sc.locations.size(),
                     std::vector<std::vector<ClusterModel>>(n_links));

  for (std::size_t li = 0; li < n_links; ++li) {
    auto sep_it = config.link_separation_dB.find(sc.links[li]);
    const double sep =
        sep_it == config.link_separation_dB.end() ? config.separation_dB : sep_it->second;

    // Link-level profile: a smooth curve shared by its clusters, clusters
    // stacked a few dB apart as in a bimodal link.
    const double level = uniform(30.0, 45.0);
    const double amplitude = uniform(2.0, 5.0);
    const double cycles = uniform(0.5, 1.5);
    const double phase = uniform(0.0, 2.0 * std::numbers::pi);
    const double ripple = uniform(0.5, 1.5);
    const double ripple_cycles = uniform(2.0, 3.0);

    std::vector<std::vector<double>> shapes;
    std::vector<double> weights;
    double cluster_level = level;
    for (int k = 0; k < config.clusters_per_link; ++k) {
      if (k > 0) cluster_level += uniform(6.0, 10.0);
      const double ripple_phase = uniform(0.0, 2.0 * std::numbers::pi);
      std::vector<double> shape(f);
      for (std::size_t s = 0; s < f; ++s) {
        const double u = static_cast<double>(s) / static_cast<double>(f);
        shape[s] = cluster_level + amplitude * std::sin(2.0 * std::numbers::pi * cycles * u + phase) +
                   ripple * std::sin(2.0 * std::numbers::pi * ripple_cycles * u + ripple_phase);
      }
      shapes.push_back(std::move(shape));
      weights.push_back(uniform(0.5, 1.5));
    }
    double weight_total = 0.0;
    for (double w : weights) weight_total += w;
    for (double& w : weights) w /= weight_total;

    // The entity shifts the whole profile (mean level) and tilts it across the
    // band, both varying linearly over the floor.
    const SpatialField shift = SpatialField::random(rng, sep);
    const SpatialField tilt = SpatialField::random(rng, 0.5 * sep);

    for (const auto& loc : sc.locations) {
      const double offset = shift.at(loc.col, loc.row, centre_col, centre_row);
      const double slope = tilt.at(loc.col, loc.row, centre_col, centre_row);
      auto& models = sc.clusters[static_cast<std::size_t>(loc.id)][li];
      for (std::size_t k = 0; k < shapes.size(); ++k) {
        ClusterModel cm;
        cm.weight = weights[k];
        cm.noise_sigma = config.noise_sigma;
        cm.base.resize(f);
        for (std::size_t s = 0; s < f; ++s) {
          const double u = f > 1 ? static_cast<double>(s) / static_cast<double>(f - 1) - 0.5 : 0.0;
          cm.base[s] = shapes[k][s] + offset + slope * u;
        }
        models.push_back(std::move(cm));
      }
    }
  }
  return sc;
}

std::vector<std::vector<ClusterModel>> clusters_at(const Scenario& sc, Point2 where) {
  const auto& c = sc.config;
  const double max_x = (c.cols - 1) * c.spacing_m;
  const double max_y = (c.rows - 1) * c.spacing_m;
  if (!(where.x >= -kDomainSlack && where.x <= max_x + kDomainSlack && where.y >= -kDomainSlack &&
        where.y <= max_y + kDomainSlack)) {
    throw OutOfDomainError("coordinate (" + std::to_string(where.x) + ", " +
                           std::to_string(where.y) + ") lies outside the grid");
  }
  const double gx = std::clamp(where.x / c.spacing_m, 0.0, static_cast<double>(c.cols - 1));
  const double gy = std::clamp(where.y / c.spacing_m, 0.0, static_cast<double>(c.rows - 1));
  const int c0 = std::min(static_cast<int>(std::floor(gx)), std::max(c.cols - 2, 0));
  const int r0 = std::min(static_cast<int>(std::floor(gy)), std::max(c.rows - 2, 0));
  const int c1 = std::min(c0 + 1, c.cols - 1);
  const int r1 = std::min(r0 + 1, c.rows - 1);
  const double tx = c1 > c0 ? gx - c0 : 0.0;
  const double ty = r1 > r0 ? gy - r0 : 0.0;

  const auto id = [&](int r, int col) { return static_cast<std::size_t>(r * c.cols + col); };
  const std::size_t nearest =
      id(static_cast<int>(std::lround(gy)), static_cast<int>(std::lround(gx)));

  std::vector<std::vector<ClusterModel>> out = sc.clusters[nearest];
  const auto& q00 = sc.clusters[id(r0, c0)];
  const auto& q01 = sc.clusters[id(r0, c1)];
  const auto& q10 = sc.clusters[id(r1, c0)];
  const auto& q11 = sc.clusters[id(r1, c1)];
  for (std::size_t li = 0; li < out.size(); ++li) {
    for (std::size_t k = 0; k < out[li].size(); ++k) {
      auto& base = out[li][k].base;
      for (std::size_t s = 0; s < base.size(); ++s) {
        base[s] = (1 - tx) * (1 - ty) * q00[li][k].base[s] + tx * (1 - ty) * q01[li][k].base[s] +
                  (1 - tx) * ty * q10[li][k].base[s] + tx * ty * q11[li][k].base[s];
      }
    }
  }
  return out;
}

namespace {

std::vector<CsiPacket> emit(const Scenario& sc, const std::vector<std::vector<ClusterModel>>& models,
                            int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("packet count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::discrete_distribution<std::size_t>> pick;
  pick.reserve(models.size());
  for (const auto& link_models : models) {
    std::vector<double> w;
    for (const auto& cm : link_models) w.push_back(cm.weight);
    pick.emplace_back(w.begin(), w.end());
  }
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<CsiPacket> packets;
  packets.reserve(static_cast<std::size_t>(count) * models.size());
  for (int t = 0; t < count; ++t) {
    for (std::size_t li = 0; li < models.size(); ++li) {
      const ClusterModel& cm = models[li][pick[li](rng)];
      CsiPacket p{t, sc.links[li], cm.base};
      if (cm.noise_sigma > 0.0) {
        for (double& m : p.magnitudes) m += cm.noise_sigma * gauss(rng);
      }
      packets.push_back(std::move(p));
    }
  }
  return packets;
}

}  // namespace

std::vector<CsiPacket> generate_packets(const Scenario& sc, int location_id, int count,
                                        std::uint64_t seed) {
  return emit(sc, sc.clusters[static_cast<std::size_t>(sc.location(location_id).id)], count, seed);
}

std::vector<CsiPacket> generate_packets(const Scenario& sc, Point2 where, int count,
                                        std::uint64_t seed) {
  return emit(sc, clusters_at(sc, where), count, seed);
}

std::vector<Point2> cell_midpoints(const Scenario& sc) {
  const auto& c = sc.config;
  std::vector<Point2> out;
  for (int r = 0; r + 1 < c.rows; ++r)
    for (int col = 0; col + 1 < c.cols; ++col)
      out.push_back({(col + 0.5) * c.spacing_m, (r + 0.5) * c.spacing_m});
  return out;
}

}  // namespace monostream
