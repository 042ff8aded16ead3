#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "monostream/csi_model.hpp"

namespace monostream {

/// Rectangle over one link's CSI profile: an inclusive sub-carrier range by a
/// closed magnitude band.
struct ContextFilter {
  LinkId link;
  int subcarrier_lo = 0;
  int subcarrier_hi = 0;
  double magnitude_lo = 0.0;
  double magnitude_hi = 0.0;

  bool operator==(const ContextFilter&) const = default;
};

struct FilterBank {
  std::uint64_t seed = 0;
  std::vector<ContextFilter> filters;

  std::size_t size() const { return filters.size(); }
  bool operator==(const FilterBank&) const = default;
};

/// Indices of two filters; the feature is response(i) - response(j).
struct FeaturePair {
  int i = 0;
  int j = 0;

  auto operator<=>(const FeaturePair&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  /// Filters whose link was absent from the window (their response is 0).
  std::size_t missing_link_filters = 0;
};

/// Samples `d` rectangles. Each picks its link uniformly from `links`, a
/// sub-carrier start and width uniformly over the valid ranges of
/// [0, subcarriers), and a magnitude start and height uniformly inside the
/// link's bounds. Deterministic in `seed`.
FilterBank sample_filter_bank(std::uint64_t seed, std::size_t d, std::span<const LinkId> links,
                              const LinkBounds& bounds, int subcarriers);

struct FilterResponse {
  double fraction = 0.0;
  bool link_missing = false;
};

/// Fraction of the packets on `filter.link` having at least one sub-carrier in
/// [subcarrier_lo, subcarrier_hi] whose magnitude lies in the closed band.
FilterResponse count_in_filter(const CsiWindow& window, const ContextFilter& filter);

double haar_feature(const CsiWindow& window, const FilterBank& bank, FeaturePair pair);

/// Every (i, j) with i < j in lexicographic order: C(d, 2) pairs.
std::vector<FeaturePair> all_pairs(std::size_t d);

/// Seeded uniform subset of all_pairs(d), returned in canonical order.
/// `count` >= C(d, 2) returns every pair.
std::vector<FeaturePair> sample_pairs(std::size_t d, std::size_t count, std::uint64_t seed);

/// Per-filter responses, computed once each.
std::vector<double> filter_responses(const CsiWindow& window, const FilterBank& bank,
                                     std::size_t* missing_links = nullptr);

FeatureVector extract_features(const CsiWindow& window, const FilterBank& bank,
                               std::span<const FeaturePair> pairs);

}  // namespace monostream
