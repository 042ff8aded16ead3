#include "monostream/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "monostream/errors.hpp"

namespace monostream {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw MalformedInputError("line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(line_no, "invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

bool blank(std::string_view line) { return trim(line).empty() || trim(line).front() == '#'; }

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << dataset.header.n << ", " << dataset.header.m << ", " << dataset.header.f << '\n';
  for (const auto& lp : dataset.packets) {
    const auto& p = lp.packet;
    out << p.timestamp << ", " << p.link.tx << ", " << p.link.rx << ", ";
    if (lp.label) {
      out << *lp.label;
    } else {
      out << '-';
    }
    for (double m : p.magnitudes) out << ", " << format_double(m);
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() != 3) fail(line_no, "header must declare n, m, f");
      ds.header = {parse_number<int>(fields[0], line_no, "n"),
                   parse_number<int>(fields[1], line_no, "m"),
                   parse_number<int>(fields[2], line_no, "f")};
      if (ds.header.n < 1 || ds.header.m < 1 || ds.header.f < 1) {
        fail(line_no, "header counts must be positive");
      }
      have_header = true;
      continue;
    }
    const auto expected = 4 + static_cast<std::size_t>(ds.header.f);
    if (fields.size() != expected) {
      fail(line_no, "expected " + std::to_string(expected) + " fields, got " +
                        std::to_string(fields.size()));
    }
    LabeledPacket lp;
    lp.packet.timestamp = parse_number<std::int64_t>(fields[0], line_no, "timestamp");
    lp.packet.link = {parse_number<int>(fields[1], line_no, "tx"),
                      parse_number<int>(fields[2], line_no, "rx")};
    if (lp.packet.link.tx < 0 || lp.packet.link.tx >= ds.header.n || lp.packet.link.rx < 0 ||
        lp.packet.link.rx >= ds.header.m) {
      fail(line_no, "antenna index outside the declared n, m");
    }
    if (fields[3] != "-") lp.label = parse_number<int>(fields[3], line_no, "location id");
    lp.packet.magnitudes.reserve(static_cast<std::size_t>(ds.header.f));
    for (std::size_t k = 4; k < fields.size(); ++k) {
      const double m = parse_number<double>(fields[k], line_no, "magnitude");
      if (!std::isfinite(m)) fail(line_no, "non-finite magnitude");
      lp.packet.magnitudes.push_back(m);
    }
    ds.packets.push_back(std::move(lp));
  }
  if (!have_header) throw MalformedInputError("dataset has no header line");
  return ds;
}

void write_labels(std::ostream& out, const LabelTable& labels) {
  for (const auto& [label, p] : labels) {
    out << label << ", " << format_double(p.x) << ", " << format_double(p.y) << '\n';
  }
}

LabelTable read_labels(std::istream& in) {
  LabelTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3) fail(line_no, "label records are 'label, x, y'");
    const int label = parse_number<int>(fields[0], line_no, "label");
    const Point2 p{parse_number<double>(fields[1], line_no, "x"),
                   parse_number<double>(fields[2], line_no, "y")};
    if (!table.emplace(label, p).second) fail(line_no, "duplicate label " + std::to_string(label));
  }
  return table;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw MalformedInputError("cannot write " + path);
  write_dataset(out, dataset);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot read " + path);
  return read_dataset(in);
}

void save_labels(const std::string& path, const LabelTable& labels) {
  std::ofstream out(path);
  if (!out) throw MalformedInputError("cannot write " + path);
  write_labels(out, labels);
}

LabelTable load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot read " + path);
  return read_labels(in);
}

std::string labels_path(const std::string& dataset_path) { return dataset_path + ".labels"; }

std::map<int, std::vector<CsiPacket>> packets_by_label(const Dataset& dataset) {
  std::map<int, std::vector<CsiPacket>> out;
  for (const auto& lp : dataset.packets) {
    if (lp.label) out[*lp.label].push_back(lp.packet);
  }
  return out;
}

}  // namespace monostream
