#include "monostream/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "monostream/errors.hpp"
#include "monostream/estimator.hpp"

namespace monostream {

namespace {

enum SeedSalt : std::uint64_t {
  kBankSalt = 1,
  kPairSalt = 2,
  kBoostSalt = 3,
  kSubcarrierSalt = 4,
  kTrainPacketSalt = 100,
  kTestPacketSalt = 5000,
  kMidpointPacketSalt = 9000,
  kRepeatSalt = 20000,
};

Fingerprint projected(const Fingerprint& fp, const Preprocessing& prep) {
  Fingerprint out;
  for (const auto& loc : fp.locations) {
    FingerprintLocation l{loc.id, loc.coords, {}};
    l.windows.reserve(loc.windows.size());
    for (const auto& w : loc.windows) l.windows.push_back(select_channels(w, prep));
    out.locations.push_back(std::move(l));
  }
  return out;
}

std::size_t clamp_k(int k, std::size_t locations) {
  if (k < 1) throw ConfigError("k must be >= 1");
  return std::min(static_cast<std::size_t>(k), locations);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int_value(const std::string& text, const std::string& parameter) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + text + "' for " + parameter);
  }
}

std::string link_list_string(const std::vector<LinkId>& links) {
  std::string s;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (i > 0) s += ",";
    s += to_string(links[i]);
  }
  return s;
}

}  // namespace

Fingerprint build_fingerprint(const std::map<int, std::vector<CsiPacket>>& streams,
                              const LabelTable& coords, std::size_t w, std::size_t max_windows) {
  if (w < 1) throw ConfigError("window size must be >= 1");
  Fingerprint fp;
  for (const auto& [label, packets] : streams) {
    auto it = coords.find(label);
    if (it == coords.end()) {
      throw MalformedInputError("no coordinates for location " + std::to_string(label));
    }
    auto windows = build_windows(packets, w, std::max<std::size_t>(1, w / 2));
    if (max_windows > 0 && windows.size() > max_windows) windows.resize(max_windows);
    fp.locations.push_back({label, it->second, std::move(windows)});
  }
  fp.bounds = magnitude_bounds(fp);
  return fp;
}

BoostModel train_pipeline(const Fingerprint& fingerprint, const PipelineConfig& config) {
  if (config.d < 2) throw ConfigError("d must be >= 2");
  if (config.g < 0) throw ConfigError("g must be >= 0");
  if (config.f < 0) throw ConfigError("f must be >= 0");

  Preprocessing prep;
  prep.outlier_threshold = config.outlier_threshold;
  prep.links = config.links;
  std::sort(prep.links.begin(), prep.links.end());
  prep.links.erase(std::unique(prep.links.begin(), prep.links.end()), prep.links.end());

  const int source_f = static_cast<int>(fingerprint.subcarrier_count());
  if (config.f > source_f) {
    throw ConfigError("f = " + std::to_string(config.f) + " exceeds the " +
                      std::to_string(source_f) + " sub-carriers in the data");
  }
  if (config.f > 0 && config.f < source_f) {
    std::vector<int> all(static_cast<std::size_t>(source_f));
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(derive_seed(config.seed, kSubcarrierSalt));
    std::sample(all.begin(), all.end(), std::back_inserter(prep.subcarriers),
                static_cast<std::size_t>(config.f), rng);
  }

  const std::vector<LinkId> links = prep.links.empty() ? fingerprint.links() : prep.links;
  Fingerprint fp = fingerprint;
  if (!prep.links.empty() || !prep.subcarriers.empty() || fp.bounds.empty()) {
    fp.bounds = magnitude_bounds(projected(fingerprint, prep), links);
  }
  const int f = prep.subcarriers.empty() ? source_f : static_cast<int>(prep.subcarriers.size());

  const auto d = static_cast<std::size_t>(config.d);
  const FilterBank bank = sample_filter_bank(derive_seed(config.seed, kBankSalt), d, links, fp.bounds, f);
  const auto pairs = sample_pairs(d, config.pair_count, derive_seed(config.seed, kPairSalt));

  TrainConfig tc;
  tc.boost.rounds = config.g;
  tc.boost.candidate_features = config.candidate_features;
  tc.boost.max_thresholds = config.max_thresholds;
  tc.boost.seed = derive_seed(config.seed, kBoostSalt);
  tc.preprocessing = prep;
  return train(fp, bank, pairs, tc);
}

std::vector<LabeledWindow> labeled_windows(const std::map<int, std::vector<CsiPacket>>& streams,
                                           const LabelTable& coords, std::size_t w,
                                           std::size_t max_per_label) {
  std::vector<LabeledWindow> out;
  for (const auto& [label, packets] : streams) {
    auto it = coords.find(label);
    if (it == coords.end()) {
      throw MalformedInputError("no ground truth for label " + std::to_string(label));
    }
    auto windows = build_windows(packets, w, w);
    if (max_per_label > 0 && windows.size() > max_per_label) windows.resize(max_per_label);
    for (auto& win : windows) out.push_back({std::move(win), it->second, label});
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw MalformedInputError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw MalformedInputError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> cdf;
  const auto n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    cdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return cdf;
}

EvalReport evaluate(const BoostModel& model, std::span<const LabeledWindow> tests, std::size_t k) {
  if (tests.empty()) throw MalformedInputError("empty test set");
  EvalReport report;
  std::vector<double> discrete;
  for (const auto& t : tests) {
    const LocationEstimate est = locate(model, t.window, k);
    report.errors.push_back(distance(est.continuous, t.truth));
    discrete.push_back(distance(est.discrete_coords, t.truth));
    report.latencies_ms.push_back(est.latency_ms);
  }
  report.median_error = median(report.errors);
  report.cdf = empirical_cdf(report.errors);
  report.discrete_median_error = median(discrete);
  report.mean_latency_ms =
      std::accumulate(report.latencies_ms.begin(), report.latencies_ms.end(), 0.0) /
      static_cast<double>(report.latencies_ms.size());
  report.p50_latency_ms = percentile(report.latencies_ms, 0.5);
  report.p95_latency_ms = percentile(report.latencies_ms, 0.95);
  report.config = {{"k", std::to_string(k)},
                   {"d", std::to_string(model.bank.size())},
                   {"g", std::to_string(model.rounds.size())},
                   {"pairs", std::to_string(model.pairs.size())},
                   {"w", std::to_string(tests.front().window.window_size())},
                   {"locations", std::to_string(model.locations.size())},
                   {"windows", std::to_string(tests.size())}};
  return report;
}

ExperimentData generate_experiment(const ExperimentConfig& config, std::uint64_t scenario_seed,
                                   int test_packets) {
  if (config.train_windows < 2) throw ConfigError("need at least two training windows");
  if (config.test_windows < 1) throw ConfigError("need at least one test window");
  if (config.pipeline.w < 1) throw ConfigError("w must be >= 1");
  ScenarioConfig sc = config.scenario;
  sc.seed = scenario_seed;

  ExperimentData data;
  data.scenario = build_scenario(sc);
  const int w = config.pipeline.w;
  const int stride = std::max(1, w / 2);
  const int train_packets = (config.train_windows - 1) * stride + w;
  test_packets = std::max(test_packets, config.test_windows * w);

  std::map<int, std::vector<CsiPacket>> train_streams;
  for (const auto& loc : data.scenario.locations) {
    data.grid_coords[loc.id] = loc.coords;
    train_streams[loc.id] = generate_packets(data.scenario, loc.id, train_packets,
                                             derive_seed(scenario_seed, kTrainPacketSalt + loc.id));
    data.grid_test[loc.id] = generate_packets(data.scenario, loc.id, test_packets,
                                              derive_seed(scenario_seed, kTestPacketSalt + loc.id));
  }
  const auto mids = cell_midpoints(data.scenario);
  for (std::size_t i = 0; i < mids.size(); ++i) {
    const int label = kMidpointLabelBase + static_cast<int>(i);
    data.midpoint_coords[label] = mids[i];
    data.midpoint_test[label] = generate_packets(data.scenario, mids[i], test_packets,
                                                 derive_seed(scenario_seed, kMidpointPacketSalt + i));
  }
  data.fingerprint = build_fingerprint(train_streams, data.grid_coords, static_cast<std::size_t>(w),
                                       static_cast<std::size_t>(config.train_windows));
  return data;
}

std::vector<LabeledWindow> test_set(const ExperimentData& data, TestPoints points, std::size_t w,
                                    std::size_t count) {
  if (points == TestPoints::Grid) return labeled_windows(data.grid_test, data.grid_coords, w, count);
  return labeled_windows(data.midpoint_test, data.midpoint_coords, w, count);
}

std::pair<Dataset, LabelTable> grid_dataset(const Scenario& scenario, int packets_per_location,
                                            std::uint64_t seed) {
  Dataset ds;
  ds.header = {scenario.config.n, scenario.config.m, scenario.config.f};
  LabelTable labels;
  for (const auto& loc : scenario.locations) {
    labels[loc.id] = loc.coords;
    for (auto& p : generate_packets(scenario, loc.id, packets_per_location,
                                    derive_seed(seed, kTrainPacketSalt + loc.id))) {
      ds.packets.push_back({std::move(p), loc.id});
    }
  }
  return {std::move(ds), std::move(labels)};
}

std::pair<Dataset, LabelTable> midpoint_dataset(const Scenario& scenario, int packets_per_point,
                                                std::uint64_t seed) {
  Dataset ds;
  ds.header = {scenario.config.n, scenario.config.m, scenario.config.f};
  LabelTable labels;
  const auto mids = cell_midpoints(scenario);
  for (std::size_t i = 0; i < mids.size(); ++i) {
    const int label = kMidpointLabelBase + static_cast<int>(i);
    labels[label] = mids[i];
    for (auto& p : generate_packets(scenario, mids[i], packets_per_point,
                                    derive_seed(seed, kMidpointPacketSalt + i))) {
      ds.packets.push_back({std::move(p), label});
    }
  }
  return {std::move(ds), std::move(labels)};
}

std::vector<LinkId> parse_link_subset(const std::string& value, int n_tx) {
  if (value.rfind("rx:", 0) == 0) {
    std::vector<LinkId> links;
    for (const auto& tok : split(value.substr(3), ',')) {
      const int rx = parse_int_value(tok, "links");
      for (int tx = 0; tx < n_tx; ++tx) links.push_back({tx, rx});
    }
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
    return links;
  }
  try {
    return parse_link_list(value);
  } catch (const MalformedInputError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::vector<LinkId>> receiver_combinations(int n_tx, int n_rx) {
  std::vector<std::vector<LinkId>> out;
  for (unsigned mask = 1; mask < (1u << n_rx); ++mask) {
    std::vector<LinkId> links;
    for (int tx = 0; tx < n_tx; ++tx)
      for (int rx = 0; rx < n_rx; ++rx)
        if (mask & (1u << rx)) links.push_back({tx, rx});
    std::sort(links.begin(), links.end());
    out.push_back(std::move(links));
  }
  return out;
}

std::vector<SweepPoint> sweep(const std::string& parameter, const std::vector<std::string>& values,
                              const ExperimentConfig& base) {
  static const std::set<std::string> known{"w", "f", "k", "d", "g", "links"};
  if (!known.contains(parameter)) throw ConfigError("unknown sweep parameter '" + parameter + "'");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (base.seeds < 1) throw ConfigError("seeds must be >= 1");

  // Expand and validate the value list up front.
  std::vector<std::string> labels;
  std::vector<int> numeric;
  std::vector<std::vector<LinkId>> subsets;
  if (parameter == "links") {
    for (const auto& v : values) {
      if (v == "rx-combos") {
        for (auto& s : receiver_combinations(base.scenario.n, base.scenario.m)) {
          labels.push_back(link_list_string(s));
          subsets.push_back(std::move(s));
        }
      } else {
        subsets.push_back(parse_link_subset(v, base.scenario.n));
        labels.push_back(v);
      }
    }
  } else {
    for (const auto& v : values) {
      const int x = parse_int_value(v, parameter);
      if (x < (parameter == "g" || parameter == "f" ? 0 : 1)) {
        throw ConfigError("value out of range for " + parameter + ": " + v);
      }
      numeric.push_back(x);
      labels.push_back(v);
    }
  }

  std::vector<SweepPoint> points(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) points[i].value = labels[i];

  const auto k_for = [&](const BoostModel& m, int k) { return clamp_k(k, m.locations.size()); };
  const auto tests_at = [&](const ExperimentData& data, int w) {
    return test_set(data, base.test_points, static_cast<std::size_t>(w),
                    static_cast<std::size_t>(base.test_windows));
  };

  for (int s = 0; s < base.seeds; ++s) {
    const std::uint64_t scenario_seed = base.scenario.seed + static_cast<std::uint64_t>(s);
    int test_packets = base.test_windows * base.pipeline.w;
    if (parameter == "w") {
      test_packets = base.test_windows * std::max(base.pipeline.w,
                                                  *std::max_element(numeric.begin(), numeric.end()));
    }
    const ExperimentData data = generate_experiment(base, scenario_seed, test_packets);
    PipelineConfig pc = base.pipeline;

    if (parameter == "w" || parameter == "k") {
      const BoostModel model = train_pipeline(data.fingerprint, pc);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        const int w = parameter == "w" ? numeric[i] : pc.w;
        const int k = parameter == "k" ? numeric[i] : pc.k;
        const auto tests = tests_at(data, w);
        points[i].reports.push_back(evaluate(model, tests, k_for(model, k)));
      }
    } else if (parameter == "g") {
      pc.g = *std::max_element(numeric.begin(), numeric.end());
      const BoostModel full = train_pipeline(data.fingerprint, pc);
      const auto tests = tests_at(data, pc.w);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        BoostModel m = full;
        m.rounds.resize(static_cast<std::size_t>(numeric[i]));
        m.loss_history.resize(static_cast<std::size_t>(numeric[i]) + 1);
        m.config.boost.rounds = numeric[i];
        points[i].reports.push_back(evaluate(m, tests, k_for(m, pc.k)));
      }
    } else if (parameter == "d") {
      const auto tests = tests_at(data, pc.w);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        PipelineConfig c = pc;
        c.d = numeric[i];
        const BoostModel m = train_pipeline(data.fingerprint, c);
        points[i].reports.push_back(evaluate(m, tests, k_for(m, c.k)));
      }
    } else if (parameter == "f") {
      const auto tests = tests_at(data, pc.w);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        for (int rep = 0; rep < std::max(1, base.f_repeats); ++rep) {
          PipelineConfig c = pc;
          c.f = numeric[i];
          c.seed = derive_seed(pc.seed, kRepeatSalt + static_cast<std::uint64_t>(rep));
          const BoostModel m = train_pipeline(data.fingerprint, c);
          points[i].reports.push_back(evaluate(m, tests, k_for(m, c.k)));
        }
      }
    } else {
      const auto tests = tests_at(data, pc.w);
      for (std::size_t i = 0; i < subsets.size(); ++i) {
        PipelineConfig c = pc;
        c.links = subsets[i];
        const BoostModel m = train_pipeline(data.fingerprint, c);
        points[i].reports.push_back(evaluate(m, tests, k_for(m, c.k)));
      }
    }
  }

  for (auto& p : points) {
    std::vector<double> medians;
    for (const auto& r : p.reports) medians.push_back(r.median_error);
    const double mean = std::accumulate(medians.begin(), medians.end(), 0.0) /
                        static_cast<double>(medians.size());
    double var = 0.0;
    for (double m : medians) var += (m - mean) * (m - mean);
    p.mean_median = mean;
    p.std_median = medians.size() > 1 ? std::sqrt(var / static_cast<double>(medians.size() - 1)) : 0.0;
  }
  if (parameter == "links") {
    std::stable_sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
      return a.mean_median < b.mean_median;
    });
  }
  return points;
}

std::vector<LinkId> select_links(const Fingerprint& fingerprint,
                                 std::span<const std::vector<LinkId>> candidates,
                                 double validation_fraction, const PipelineConfig& config,
                                 const std::map<LinkId, double>* quality) {
  if (candidates.empty()) throw ConfigError("no candidate link subsets");
  std::vector<std::vector<LinkId>> subsets;
  for (const auto& c : candidates) {
    if (c.empty()) throw ConfigError("empty candidate link subset");
    auto s = c;
    std::sort(s.begin(), s.end());
    subsets.push_back(std::move(s));
  }
  if (subsets.size() == 1) return subsets.front();

  // Lower score wins; ties by size, then lexicographic.
  std::vector<double> score(subsets.size());
  if (quality != nullptr) {
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      double total = 0.0;
      for (LinkId l : subsets[i]) {
        auto it = quality->find(l);
        if (it == quality->end()) throw MissingLinkError("no quality score for link " + to_string(l));
        total += it->second;
      }
      score[i] = -total / static_cast<double>(subsets[i].size());
    }
  } else {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("validation fraction must lie in (0, 1)");
    }
    Fingerprint train_part;
    std::vector<LabeledWindow> validation;
    for (const auto& loc : fingerprint.locations) {
      const std::size_t n = loc.windows.size();
      auto held = static_cast<std::size_t>(std::ceil(validation_fraction * static_cast<double>(n)));
      held = std::max<std::size_t>(held, 1);
      if (n < held + 2) {
        throw ConfigError("location " + std::to_string(loc.id) +
                          " has too few windows to hold out validation data");
      }
      FingerprintLocation t{loc.id, loc.coords, {loc.windows.begin(), loc.windows.end() - static_cast<std::ptrdiff_t>(held)}};
      for (std::size_t i = n - held; i < n; ++i) validation.push_back({loc.windows[i], loc.coords, loc.id});
      train_part.locations.push_back(std::move(t));
    }
    train_part.bounds = fingerprint.bounds.empty() ? magnitude_bounds(train_part) : fingerprint.bounds;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      PipelineConfig c = config;
      c.links = subsets[i];
      const BoostModel m = train_pipeline(train_part, c);
      score[i] = evaluate(m, validation, clamp_k(c.k, m.locations.size())).median_error;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < subsets.size(); ++i) {
    const bool better = score[i] < score[best] ||
                        (score[i] == score[best] &&
                         (subsets[i].size() < subsets[best].size() ||
                          (subsets[i].size() == subsets[best].size() && subsets[i] < subsets[best])));
    if (better) best = i;
  }
  return subsets[best];
}

}  // namespace monostream
