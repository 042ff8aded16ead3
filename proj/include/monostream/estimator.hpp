#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "monostream/csi_model.hpp"
#include "monostream/joint_boost.hpp"

namespace monostream {

struct Posterior {
  /// P(l | S) per model location, summing to one.
  std::vector<double> probabilities;
  ClassifierOutput source;
};

/// Fuses per-location detections into P(l | S).
///
/// With at least one positive detection the posterior is proportional to
/// prior_l * c_l over the positive locations and zero elsewhere; positives
/// that all carry zero confidence share the mass by prior. With no positive
/// detection it falls back to a unit-temperature soft-max of the scores.
/// An empty `prior` means every location is equally likely.
Posterior fuse(const ClassifierOutput& outputs, std::span<const double> prior = {});

/// Index of the most probable location; ties go to the lower index, which is
/// the lower id because model locations are sorted by id.
std::size_t estimate_discrete(const Posterior& posterior);

/// Indices of the k most probable locations, most probable first.
std::vector<std::size_t> top_k(const Posterior& posterior, std::size_t k);

/// Probability-weighted average of the k most probable coordinates. Falls back
/// to the discrete estimate when those k probabilities are all zero.
Point2 estimate_continuous(const Posterior& posterior, std::span<const Point2> coords,
                           std::size_t k);

struct LocationEstimate {
  int discrete_id = 0;
  Point2 discrete_coords;
  Point2 continuous;
  std::size_t k_used = 0;
  Posterior posterior;
  /// (location id, probability) for the k most probable locations.
  std::vector<std::pair<int, double>> top;
  double latency_ms = 0.0;
};

/// Preprocess, extract features, classify, fuse and estimate, timing the call.
LocationEstimate locate(const BoostModel& model, const CsiWindow& window, std::size_t k);

}  // namespace monostream
