#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace monostream {

/// One (transmitter antenna, receiver antenna) pair.
struct LinkId {
  int tx = 0;
  int rx = 0;

  auto operator<=>(const LinkId&) const = default;
};

/// "tx-rx", e.g. "0-2".
std::string to_string(LinkId link);
LinkId parse_link(std::string_view text);
/// Comma separated list of "tx-rx" tokens.
std::vector<LinkId> parse_link_list(std::string_view text);

/// All n*m links in (tx, rx) order.
std::vector<LinkId> all_links(int n_tx, int n_rx);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

double distance(Point2 a, Point2 b);

struct CsiPacket {
  std::int64_t timestamp = 0;
  LinkId link;
  /// dB, one value per sub-carrier group.
  std::vector<double> magnitudes;

  bool operator==(const CsiPacket&) const = default;
};

double mean_magnitude(const CsiPacket& packet);

/// A batch of packets grouped by virtual link. Immutable once built.
///
/// Every packet in a window carries the same number of sub-carriers and every
/// link present holds at least one packet.
class CsiWindow {
 public:
  CsiWindow() = default;
  /// Throws MalformedInputError on inconsistent sub-carrier counts or
  /// non-finite magnitudes.
  explicit CsiWindow(std::vector<CsiPacket> packets);

  std::size_t subcarrier_count() const { return subcarriers_; }
  bool empty() const { return by_link_.empty(); }
  bool has_link(LinkId link) const { return by_link_.contains(link); }
  /// Empty span when the link is absent.
  std::span<const CsiPacket> packets(LinkId link) const;
  std::vector<LinkId> links() const;
  /// Largest per-link packet count.
  std::size_t window_size() const;
  std::size_t total_packets() const;
  /// Packets in link order, then in arrival order within each link.
  std::vector<CsiPacket> flatten() const;

  bool operator==(const CsiWindow&) const = default;

 private:
  std::map<LinkId, std::vector<CsiPacket>> by_link_;
  std::size_t subcarriers_ = 0;
};

struct MagnitudeRange {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const MagnitudeRange&) const = default;
};

using LinkBounds = std::map<LinkId, MagnitudeRange>;

struct FingerprintLocation {
  int id = 0;
  Point2 coords;
  std::vector<CsiWindow> windows;
};

/// Offline training map: labelled windows per location plus the global
/// per-link magnitude frame the context filters are placed in.
struct Fingerprint {
  std::vector<FingerprintLocation> locations;
  LinkBounds bounds;

  /// Throws ConfigError when ids repeat or fewer than two locations exist.
  void validate() const;
  std::vector<LinkId> links() const;
  std::size_t subcarrier_count() const;
};

/// Cuts each link's packet sequence into windows of `window_size` packets,
/// advancing by `stride`. Window k holds every link that still has a full
/// window at offset k*stride; the trailing remainder is discarded.
std::vector<CsiWindow> build_windows(std::span<const CsiPacket> packets, std::size_t window_size,
                                     std::size_t stride);

inline constexpr double kDefaultOutlierThreshold = 3.5;

/// Drops packets whose mean magnitude has a robust z-score
/// |x - median| / (1.4826 * MAD) above `threshold`, per link. Repeats until
/// nothing more is dropped so the result is a fixed point. The packet closest
/// to the median always survives; MAD == 0 drops nothing.
CsiWindow filter_outliers(const CsiWindow& window, double threshold = kDefaultOutlierThreshold);

inline constexpr double kBoundsWidening = 0.05;
inline constexpr double kBoundsFloorDb = 0.5;

/// Global per-link min/max over every training packet, padded on each side by
/// max(5% of the range, 0.5 dB). Links listed in `required` but absent from
/// the data raise MissingLinkError.
LinkBounds magnitude_bounds(const Fingerprint& fingerprint, std::span<const LinkId> required = {});

/// Link and sub-carrier projection plus outlier filtering, applied identically
/// to training and online windows.
struct Preprocessing {
  double outlier_threshold = kDefaultOutlierThreshold;
  /// Empty keeps every link.
  std::vector<LinkId> links;
  /// Sub-carrier indices kept, in order; empty keeps all.
  std::vector<int> subcarriers;

  bool operator==(const Preprocessing&) const = default;
};

CsiWindow select_channels(const CsiWindow& window, const Preprocessing& prep);
CsiWindow preprocess(const CsiWindow& window, const Preprocessing& prep);

}  // namespace monostream
