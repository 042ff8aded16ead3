#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "monostream/csi_model.hpp"

namespace testing_support {

using namespace monostream;

inline CsiPacket packet(std::int64_t ts, LinkId link, std::vector<double> mags) {
  return {ts, link, std::move(mags)};
}

inline CsiPacket flat_packet(std::int64_t ts, LinkId link, int f, double value) {
  return {ts, link, std::vector<double>(static_cast<std::size_t>(f), value)};
}

// Random window: every link gets `per_link` packets of `f` magnitudes in [lo, hi].
inline CsiWindow random_window(std::mt19937_64& rng, const std::vector<LinkId>& links, int per_link,
                               int f, double lo, double hi) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::vector<CsiPacket> packets;
  std::int64_t ts = 0;
  for (int p = 0; p < per_link; ++p) {
    for (LinkId link : links) {
      std::vector<double> m(static_cast<std::size_t>(f));
      for (double& v : m) v = mag(rng);
      packets.push_back({ts++, link, std::move(m)});
    }
  }
  return CsiWindow(std::move(packets));
}

// Nested-loop count used as the reference for filter responses.
inline double brute_force_fraction(const CsiWindow& window, LinkId link, int sc_lo, int sc_hi,
                                   double mag_lo, double mag_hi) {
  const auto packets = window.packets(link);
  if (packets.empty()) return 0.0;
  int hits = 0;
  for (std::size_t p = 0; p < packets.size(); ++p) {
    bool hit = false;
    for (std::size_t s = 0; s < packets[p].magnitudes.size(); ++s) {
      const int sc = static_cast<int>(s);
      const double v = packets[p].magnitudes[s];
      if (sc >= sc_lo && sc <= sc_hi && v >= mag_lo && v <= mag_hi) hit = true;
    }
    if (hit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(packets.size());
}

}  // namespace testing_support
