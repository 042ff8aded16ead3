#include "monostream/model_io.hpp"

#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "monostream/errors.hpp"

namespace monostream {

using nlohmann::json;

void to_json(json& j, const LinkId& l) { j = to_string(l); }
void from_json(const json& j, LinkId& l) { l = parse_link(j.get<std::string>()); }

void to_json(json& j, const Point2& p) { j = json::array({p.x, p.y}); }
void from_json(const json& j, Point2& p) { p = {j.at(0).get<double>(), j.at(1).get<double>()}; }

void to_json(json& j, const ContextFilter& f) {
  j = json{{"link", f.link},
           {"subcarriers", {f.subcarrier_lo, f.subcarrier_hi}},
           {"magnitudes", {f.magnitude_lo, f.magnitude_hi}}};
}
void from_json(const json& j, ContextFilter& f) {
  f.link = j.at("link").get<LinkId>();
  f.subcarrier_lo = j.at("subcarriers").at(0).get<int>();
  f.subcarrier_hi = j.at("subcarriers").at(1).get<int>();
  f.magnitude_lo = j.at("magnitudes").at(0).get<double>();
  f.magnitude_hi = j.at("magnitudes").at(1).get<double>();
}

void to_json(json& j, const SharedStump& s) {
  j = json{{"feature", s.feature}, {"threshold", s.threshold}, {"above", s.above},
           {"below", s.below},     {"members", s.members},     {"offsets", s.offsets}};
}
void from_json(const json& j, SharedStump& s) {
  j.at("feature").get_to(s.feature);
  j.at("threshold").get_to(s.threshold);
  j.at("above").get_to(s.above);
  j.at("below").get_to(s.below);
  j.at("members").get_to(s.members);
  j.at("offsets").get_to(s.offsets);
}

namespace {

json bounds_json(const LinkBounds& bounds) {
  json out = json::array();
  for (const auto& [link, r] : bounds) out.push_back({{"link", link}, {"lo", r.lo}, {"hi", r.hi}});
  return out;
}

LinkBounds bounds_from(const json& j) {
  LinkBounds out;
  for (const auto& e : j) out[e.at("link").get<LinkId>()] = {e.at("lo").get<double>(), e.at("hi").get<double>()};
  return out;
}

json config_json(const TrainConfig& c) {
  return {{"rounds", c.boost.rounds},
          {"candidate_features", c.boost.candidate_features},
          {"max_thresholds", c.boost.max_thresholds},
          {"seed", c.boost.seed},
          {"outlier_threshold", c.preprocessing.outlier_threshold},
          {"links", c.preprocessing.links},
          {"subcarriers", c.preprocessing.subcarriers}};
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  j.at("rounds").get_to(c.boost.rounds);
  j.at("candidate_features").get_to(c.boost.candidate_features);
  j.at("max_thresholds").get_to(c.boost.max_thresholds);
  j.at("seed").get_to(c.boost.seed);
  j.at("outlier_threshold").get_to(c.preprocessing.outlier_threshold);
  j.at("links").get_to(c.preprocessing.links);
  j.at("subcarriers").get_to(c.preprocessing.subcarriers);
  return c;
}

}  // namespace

void write_model(std::ostream& out, const BoostModel& model) {
  json locations = json::array();
  for (const auto& l : model.locations) locations.push_back({{"id", l.id}, {"coords", l.coords}});
  json pairs = json::array();
  for (const auto& p : model.pairs) pairs.push_back({p.i, p.j});

  json doc{{"format", "monostream-model"},
           {"version", kModelFormatVersion},
           {"source_subcarriers", model.source_subcarriers},
           {"window_size", model.window_size},
           {"config", config_json(model.config)},
           {"locations", locations},
           {"bounds", bounds_json(model.bounds)},
           {"bank", {{"seed", model.bank.seed}, {"d", model.bank.size()}, {"filters", model.bank.filters}}},
           {"pairs", pairs},
           {"rounds", model.rounds},
           {"loss_history", model.loss_history}};
  out << doc.dump() << '\n';
}

BoostModel read_model(std::istream& in) {
  try {
    const json doc = json::parse(in);
    if (doc.at("format").get<std::string>() != "monostream-model") {
      throw MalformedInputError("not a model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw MalformedInputError("unsupported model version " + std::to_string(version));
    }
    BoostModel m;
    doc.at("source_subcarriers").get_to(m.source_subcarriers);
    doc.at("window_size").get_to(m.window_size);
    m.config = config_from(doc.at("config"));
    for (const auto& l : doc.at("locations")) {
      m.locations.push_back({l.at("id").get<int>(), l.at("coords").get<Point2>()});
    }
    m.bounds = bounds_from(doc.at("bounds"));
    const auto& bank = doc.at("bank");
    bank.at("seed").get_to(m.bank.seed);
    bank.at("filters").get_to(m.bank.filters);
    if (bank.at("d").get<std::size_t>() != m.bank.size()) {
      throw MalformedInputError("filter count does not match d");
    }
    for (const auto& p : doc.at("pairs")) m.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    doc.at("rounds").get_to(m.rounds);
    doc.at("loss_history").get_to(m.loss_history);

    for (const auto& p : m.pairs) {
      if (p.i < 0 || p.j < 0 || static_cast<std::size_t>(p.i) >= m.bank.size() ||
          static_cast<std::size_t>(p.j) >= m.bank.size()) {
        throw MalformedInputError("feature pair refers to a missing filter");
      }
    }
    for (const auto& s : m.rounds) {
      if (s.feature < 0 || static_cast<std::size_t>(s.feature) >= m.pairs.size() ||
          s.offsets.size() != m.locations.size() || s.members.empty()) {
        throw MalformedInputError("malformed boosting round");
      }
      for (int member : s.members) {
        if (member < 0 || static_cast<std::size_t>(member) >= m.locations.size()) {
          throw MalformedInputError("stump member out of range");
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw MalformedInputError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::string& path, const BoostModel& model) {
  std::ofstream out(path);
  if (!out) throw MalformedInputError("cannot write " + path);
  write_model(out, model);
}

BoostModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot read " + path);
  return read_model(in);
}

}  // namespace monostream
