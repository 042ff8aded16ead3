#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monostream/csi_model.hpp"

namespace monostream {

/// Antenna and sub-carrier counts declared on the first line of a dataset.
struct DatasetHeader {
  int n = 0;
  int m = 0;
  int f = 0;

  bool operator==(const DatasetHeader&) const = default;
};

struct LabeledPacket {
  CsiPacket packet;
  /// Absent for unlabeled (online) packets, written as "-".
  std::optional<int> label;

  bool operator==(const LabeledPacket&) const = default;
};

/// Line-delimited packet records:
///
///     n, m, f
///     timestamp, tx, rx, label|-, mag_0, ..., mag_{f-1}
struct Dataset {
  DatasetHeader header;
  std::vector<LabeledPacket> packets;

  bool operator==(const Dataset&) const = default;
};

/// label -> ground-truth coordinates, stored next to a dataset as
/// `label, x, y` lines.
using LabelTable = std::map<int, Point2>;

void write_dataset(std::ostream& out, const Dataset& dataset);
/// Throws MalformedInputError with the offending line number.
Dataset read_dataset(std::istream& in);

void write_labels(std::ostream& out, const LabelTable& labels);
LabelTable read_labels(std::istream& in);

void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);
void save_labels(const std::string& path, const LabelTable& labels);
LabelTable load_labels(const std::string& path);

/// Sidecar path convention: "<dataset>.labels".
std::string labels_path(const std::string& dataset_path);

/// Packet streams keyed by label, each in file order. Unlabeled packets are
/// skipped.
std::map<int, std::vector<CsiPacket>> packets_by_label(const Dataset& dataset);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace monostream
