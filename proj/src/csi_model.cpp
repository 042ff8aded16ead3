#include "monostream/csi_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "monostream/errors.hpp"

namespace monostream {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw MalformedInputError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  double upper = *mid;
  if (n % 2 == 1) return upper;
  double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// One pass of the robust z-score filter. Returns true when anything was dropped.
bool drop_outliers_once(std::vector<CsiPacket>& packets, double threshold) {
  if (packets.size() < 2) return false;
  std::vector<double> means;
  means.reserve(packets.size());
  for (const auto& p : packets) means.push_back(mean_magnitude(p));

  const double median = median_of(means);
  std::vector<double> deviations;
  deviations.reserve(means.size());
  for (double m : means) deviations.push_back(std::abs(m - median));
  const double mad = median_of(deviations);
  if (mad == 0.0) return false;

  const auto keeper = static_cast<std::size_t>(
      std::min_element(deviations.begin(), deviations.end()) - deviations.begin());
  const double scale = 1.4826 * mad;

  std::vector<CsiPacket> kept;
  kept.reserve(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (i == keeper || deviations[i] / scale <= threshold) kept.push_back(std::move(packets[i]));
  }
  const bool dropped = kept.size() != packets.size();
  packets = std::move(kept);
  return dropped;
}

}  // namespace

std::string to_string(LinkId link) {
  return std::to_string(link.tx) + "-" + std::to_string(link.rx);
}

LinkId parse_link(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw MalformedInputError("link must be written as tx-rx: '" + std::string(text) + "'");
  }
  LinkId link{parse_int(text.substr(0, dash), "tx antenna"),
              parse_int(text.substr(dash + 1), "rx antenna")};
  if (link.tx < 0 || link.rx < 0) throw MalformedInputError("negative antenna index");
  return link;
}

std::vector<LinkId> parse_link_list(std::string_view text) {
  std::vector<LinkId> links;
  while (!text.empty()) {
    const auto comma = text.find(',');
    links.push_back(parse_link(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  return links;
}

std::vector<LinkId> all_links(int n_tx, int n_rx) {
  std::vector<LinkId> links;
  for (int tx = 0; tx < n_tx; ++tx)
    for (int rx = 0; rx < n_rx; ++rx) links.push_back({tx, rx});
  return links;
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double mean_magnitude(const CsiPacket& packet) {
  if (packet.magnitudes.empty()) return 0.0;
  return std::accumulate(packet.magnitudes.begin(), packet.magnitudes.end(), 0.0) /
         static_cast<double>(packet.magnitudes.size());
}

CsiWindow::CsiWindow(std::vector<CsiPacket> packets) {
  if (packets.empty()) return;
  subcarriers_ = packets.front().magnitudes.size();
  for (auto& p : packets) {
    if (p.magnitudes.size() != subcarriers_) {
      throw MalformedInputError("inconsistent sub-carrier count in window: expected " +
                                std::to_string(subcarriers_) + ", got " +
                                std::to_string(p.magnitudes.size()));
    }
    for (double m : p.magnitudes) {
      if (!std::isfinite(m)) throw MalformedInputError("non-finite CSI magnitude");
    }
    by_link_[p.link].push_back(std::move(p));
  }
}

std::span<const CsiPacket> CsiWindow::packets(LinkId link) const {
  auto it = by_link_.find(link);
  if (it == by_link_.end()) return {};
  return it->second;
}

std::vector<LinkId> CsiWindow::links() const {
  std::vector<LinkId> out;
  out.reserve(by_link_.size());
  for (const auto& [link, _] : by_link_) out.push_back(link);
  return out;
}

std::size_t CsiWindow::window_size() const {
  std::size_t size = 0;
  for (const auto& [_, packets] : by_link_) size = std::max(size, packets.size());
  return size;
}

std::size_t CsiWindow::total_packets() const {
  std::size_t total = 0;
  for (const auto& [_, packets] : by_link_) total += packets.size();
  return total;
}

std::vector<CsiPacket> CsiWindow::flatten() const {
  std::vector<CsiPacket> out;
  out.reserve(total_packets());
  for (const auto& [_, packets] : by_link_) out.insert(out.end(), packets.begin(), packets.end());
  return out;
}

void Fingerprint::validate() const {
  if (locations.size() < 2) throw ConfigError("fingerprint needs at least two locations");
  std::set<int> ids;
  for (const auto& loc : locations) {
    if (!ids.insert(loc.id).second) {
      throw ConfigError("duplicate fingerprint location id " + std::to_string(loc.id));
    }
  }
  for (const auto& [link, range] : bounds) {
    if (!(range.lo < range.hi)) throw ConfigError("degenerate bounds on link " + to_string(link));
  }
}

std::vector<LinkId> Fingerprint::links() const {
  std::set<LinkId> links;
  for (const auto& loc : locations)
    for (const auto& w : loc.windows)
      for (LinkId l : w.links()) links.insert(l);
  return {links.begin(), links.end()};
}

std::size_t Fingerprint::subcarrier_count() const {
  for (const auto& loc : locations)
    for (const auto& w : loc.windows)
      if (!w.empty()) return w.subcarrier_count();
  return 0;
}

std::vector<CsiWindow> build_windows(std::span<const CsiPacket> packets, std::size_t window_size,
                                     std::size_t stride) {
  if (window_size == 0 || stride == 0) throw ConfigError("window size and stride must be >= 1");
  std::vector<CsiWindow> windows;
  if (packets.empty()) return windows;

  const std::size_t f = packets.front().magnitudes.size();
  std::map<LinkId, std::vector<const CsiPacket*>> by_link;
  std::int64_t last_ts = std::numeric_limits<std::int64_t>::min();
  for (const auto& p : packets) {
    if (p.magnitudes.size() != f) {
      throw MalformedInputError("inconsistent sub-carrier count: expected " + std::to_string(f) +
                                ", got " + std::to_string(p.magnitudes.size()));
    }
    if (p.timestamp < last_ts) throw MalformedInputError("packets are not time-sorted");
    last_ts = p.timestamp;
    by_link[p.link].push_back(&p);
  }

  for (std::size_t offset = 0;; offset += stride) {
    std::vector<CsiPacket> batch;
    for (const auto& [link, seq] : by_link) {
      if (seq.size() < offset + window_size) continue;
      for (std::size_t i = offset; i < offset + window_size; ++i) batch.push_back(*seq[i]);
    }
    if (batch.empty()) break;
    windows.emplace_back(std::move(batch));
  }
  return windows;
}

CsiWindow filter_outliers(const CsiWindow& window, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("outlier threshold must be positive");
  std::vector<CsiPacket> survivors;
  survivors.reserve(window.total_packets());
  for (LinkId link : window.links()) {
    auto span = window.packets(link);
    std::vector<CsiPacket> packets(span.begin(), span.end());
    while (drop_outliers_once(packets, threshold)) {
    }
    survivors.insert(survivors.end(), std::make_move_iterator(packets.begin()),
                     std::make_move_iterator(packets.end()));
  }
  return CsiWindow(std::move(survivors));
}

LinkBounds magnitude_bounds(const Fingerprint& fingerprint, std::span<const LinkId> required) {
  if (fingerprint.locations.empty()) throw ConfigError("empty fingerprint");
  LinkBounds raw;
  for (const auto& loc : fingerprint.locations) {
    for (const auto& window : loc.windows) {
      for (LinkId link : window.links()) {
        auto [it, inserted] = raw.try_emplace(link, MagnitudeRange{
                                                        std::numeric_limits<double>::infinity(),
                                                        -std::numeric_limits<double>::infinity()});
        for (const auto& p : window.packets(link)) {
          for (double m : p.magnitudes) {
            it->second.lo = std::min(it->second.lo, m);
            it->second.hi = std::max(it->second.hi, m);
          }
        }
      }
    }
  }
  for (LinkId link : required) {
    if (!raw.contains(link)) throw MissingLinkError("no training data on link " + to_string(link));
  }
  LinkBounds bounds;
  for (const auto& [link, r] : raw) {
    const double pad = std::max(kBoundsWidening * (r.hi - r.lo), kBoundsFloorDb);
    bounds[link] = {r.lo - pad, r.hi + pad};
  }
  return bounds;
}

CsiWindow select_channels(const CsiWindow& window, const Preprocessing& prep) {
  if (prep.links.empty() && prep.subcarriers.empty()) return window;
  const std::size_t f = window.subcarrier_count();
  for (int s : prep.subcarriers) {
    if (s < 0 || static_cast<std::size_t>(s) >= f) {
      throw MalformedInputError("sub-carrier index " + std::to_string(s) + " out of range");
    }
  }
  std::vector<CsiPacket> out;
  for (LinkId link : window.links()) {
    if (!prep.links.empty() &&
        !std::binary_search(prep.links.begin(), prep.links.end(), link)) {
      continue;
    }
    for (const auto& p : window.packets(link)) {
      if (prep.subcarriers.empty()) {
        out.push_back(p);
        continue;
      }
      CsiPacket projected{p.timestamp, p.link, {}};
      projected.magnitudes.reserve(prep.subcarriers.size());
      for (int s : prep.subcarriers) projected.magnitudes.push_back(p.magnitudes[s]);
      out.push_back(std::move(projected));
    }
  }
  return CsiWindow(std::move(out));
}

CsiWindow preprocess(const CsiWindow& window, const Preprocessing& prep) {
  return filter_outliers(select_channels(window, prep), prep.outlier_threshold);
}

}  // namespace monostream
