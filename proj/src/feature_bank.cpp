#include "monostream/feature_bank.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "monostream/errors.hpp"

namespace monostream {

FilterBank sample_filter_bank(std::uint64_t seed, std::size_t d, std::span<const LinkId> links,
                              const LinkBounds& bounds, int subcarriers) {
  if (links.empty()) throw ConfigError("filter bank needs at least one link");
  if (d < 2) throw ConfigError("filter bank needs d >= 2");
  if (subcarriers < 1) throw ConfigError("filter bank needs at least one sub-carrier");
  for (LinkId link : links) {
    auto it = bounds.find(link);
    if (it == bounds.end()) throw MissingLinkError("no magnitude bounds for link " + to_string(link));
    if (!(it->second.lo < it->second.hi)) {
      throw ConfigError("degenerate magnitude bounds on link " + to_string(link));
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_link(0, links.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  FilterBank bank{seed, {}};
  bank.filters.reserve(d);
  for (std::size_t n = 0; n < d; ++n) {
    ContextFilter filter;
    filter.link = links[pick_link(rng)];

    filter.subcarrier_lo = std::uniform_int_distribution<int>(0, subcarriers - 1)(rng);
    const int width = std::uniform_int_distribution<int>(1, subcarriers - filter.subcarrier_lo)(rng);
    filter.subcarrier_hi = filter.subcarrier_lo + width - 1;

    const MagnitudeRange range = bounds.at(filter.link);
    double lo = 0.0;
    double hi = 0.0;
    do {
      lo = range.lo + unit(rng) * (range.hi - range.lo);
      hi = lo + unit(rng) * (range.hi - lo);
    } while (!(lo < hi));
    filter.magnitude_lo = lo;
    filter.magnitude_hi = hi;
    bank.filters.push_back(filter);
  }
  return bank;
}

FilterResponse count_in_filter(const CsiWindow& window, const ContextFilter& filter) {
  const auto packets = window.packets(filter.link);
  if (packets.empty()) return {0.0, true};
  const auto f = static_cast<int>(window.subcarrier_count());
  const int lo = std::max(filter.subcarrier_lo, 0);
  const int hi = std::min(filter.subcarrier_hi, f - 1);

  std::size_t inside = 0;
  for (const auto& p : packets) {
    for (int s = lo; s <= hi; ++s) {
      const double m = p.magnitudes[s];
      if (m >= filter.magnitude_lo && m <= filter.magnitude_hi) {
        ++inside;
        break;
      }
    }
  }
  return {static_cast<double>(inside) / static_cast<double>(packets.size()), false};
}

double haar_feature(const CsiWindow& window, const FilterBank& bank, FeaturePair pair) {
  if (pair.i < 0 || pair.j < 0 || static_cast<std::size_t>(pair.i) >= bank.size() ||
      static_cast<std::size_t>(pair.j) >= bank.size()) {
    throw ConfigError("feature pair index out of range");
  }
  return count_in_filter(window, bank.filters[pair.i]).fraction -
         count_in_filter(window, bank.filters[pair.j]).fraction;
}

std::vector<FeaturePair> all_pairs(std::size_t d) {
  std::vector<FeaturePair> pairs;
  if (d < 2) return pairs;
  pairs.reserve(d * (d - 1) / 2);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
  return pairs;
}

std::vector<FeaturePair> sample_pairs(std::size_t d, std::size_t count, std::uint64_t seed) {
  auto pairs = all_pairs(d);
  if (count == 0 || count >= pairs.size()) return pairs;
  std::vector<FeaturePair> chosen;
  chosen.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(pairs.begin(), pairs.end(), std::back_inserter(chosen), count, rng);
  return chosen;
}

std::vector<double> filter_responses(const CsiWindow& window, const FilterBank& bank,
                                     std::size_t* missing_links) {
  std::vector<double> responses;
  responses.reserve(bank.size());
  std::size_t missing = 0;
  for (const auto& filter : bank.filters) {
    auto r = count_in_filter(window, filter);
    missing += r.link_missing ? 1 : 0;
    responses.push_back(r.fraction);
  }
  if (missing_links != nullptr) *missing_links = missing;
  return responses;
}

FeatureVector extract_features(const CsiWindow& window, const FilterBank& bank,
                               std::span<const FeaturePair> pairs) {
  if (pairs.empty()) throw ConfigError("no feature pairs");
  FeatureVector out;
  const auto responses = filter_responses(window, bank, &out.missing_link_filters);
  out.values.reserve(pairs.size());
  for (FeaturePair pair : pairs) {
    if (pair.i < 0 || pair.j < 0 || static_cast<std::size_t>(pair.i) >= responses.size() ||
        static_cast<std::size_t>(pair.j) >= responses.size()) {
      throw ConfigError("feature pair index out of range");
    }
    out.values.push_back(responses[pair.i] - responses[pair.j]);
  }
  return out;
}

}  // namespace monostream
