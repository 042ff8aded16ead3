// monostream - device-free localization from single-link CSI profiles.
//
//   monostream synth    --out data.csv [--points grid|midpoints] [scenario flags]
//   monostream train    --data data.csv --out model.json [--w --d --g --f --seed --links]
//   monostream locate   --model model.json --data online.csv [--k --w]
//   monostream evaluate --model model.json --data test.csv [--k --w]
//   monostream sweep    --param w --values 50,100,500 [scenario and pipeline flags]
//
// Exit codes: 0 ok, 2 configuration, 3 malformed input, 4 missing link,
// 5 out of domain, 1 anything else.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "monostream/dataset_io.hpp"
#include "monostream/errors.hpp"
#include "monostream/estimator.hpp"
#include "monostream/evaluation.hpp"
#include "monostream/model_io.hpp"
#include "monostream/synth_env.hpp"

namespace {

using namespace monostream;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kMalformed = 3,
  kMissingLink = 4,
  kOutOfDomain = 5,
};

void add_scenario_flags(CLI::App* cmd, ScenarioConfig& sc) {
  cmd->add_option("--rows", sc.rows, "Grid rows")->capture_default_str();
  cmd->add_option("--cols", sc.cols, "Grid columns")->capture_default_str();
  cmd->add_option("--spacing", sc.spacing_m, "Grid spacing, metres")->capture_default_str();
  cmd->add_option("--n", sc.n, "Transmit antennas")->capture_default_str();
  cmd->add_option("--m", sc.m, "Receive antennas")->capture_default_str();
  cmd->add_option("--clusters", sc.clusters_per_link, "Clusters per link (1-3)")->capture_default_str();
  cmd->add_option("--separation", sc.separation_dB, "Adjacent-location separation, dB")->capture_default_str();
  cmd->add_option("--sigma", sc.noise_sigma, "Per-sub-carrier noise, dB")->capture_default_str();
}

struct PipelineFlags {
  PipelineConfig cfg;
  std::string links;
  int train_windows = 40;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& p, bool with_f) {
  cmd->add_option("--w", p.cfg.w, "Packets per window")->capture_default_str();
  cmd->add_option("--d", p.cfg.d, "Context filters")->capture_default_str();
  cmd->add_option("--g", p.cfg.g, "Boosting rounds")->capture_default_str();
  cmd->add_option("--k", p.cfg.k, "Locations averaged by the continuous estimator")->capture_default_str();
  if (with_f) cmd->add_option("--f", p.cfg.f, "Sub-carriers used (0 = all)")->capture_default_str();
  cmd->add_option("--links", p.links, "Links used, e.g. 0-0,0-2 or rx:0,2 (default all)");
  cmd->add_option("--candidates", p.cfg.candidate_features,
                  "Candidate features per boosting round (0 = all)")
      ->capture_default_str();
  cmd->add_option("--max-thresholds", p.cfg.max_thresholds,
                  "Thresholds per feature (0 = every midpoint)")
      ->capture_default_str();
  cmd->add_option("--pairs", p.cfg.pair_count, "Feature pairs kept (0 = all)")->capture_default_str();
  cmd->add_option("--outlier-threshold", p.cfg.outlier_threshold, "Robust z-score cut-off")
      ->capture_default_str();
  cmd->add_option("--train-windows", p.train_windows, "Training windows per location (0 = all)")
      ->capture_default_str();
}

int run_synth(ScenarioConfig sc, std::uint64_t seed, int packets, const std::string& points,
              const std::string& out) {
  sc.seed = seed;
  const Scenario scenario = build_scenario(sc);
  auto [dataset, labels] = points == "midpoints"
                               ? midpoint_dataset(scenario, packets, derive_seed(seed, 77))
                               : grid_dataset(scenario, packets, derive_seed(seed, 77));
  save_dataset(out, dataset);
  save_labels(labels_path(out), labels);
  std::cerr << "wrote " << dataset.packets.size() << " packets for " << labels.size()
            << " points to " << out << "\n";
  return kOk;
}

LabelTable labels_for(const std::string& data, const std::string& explicit_labels) {
  return load_labels(explicit_labels.empty() ? labels_path(data) : explicit_labels);
}

int run_train(PipelineFlags p, std::uint64_t seed, const std::string& data,
              const std::string& labels, const std::string& out) {
  p.cfg.seed = seed;
  const Dataset ds = load_dataset(data);
  if (!p.links.empty()) p.cfg.links = parse_link_subset(p.links, ds.header.n);
  const Fingerprint fp = build_fingerprint(packets_by_label(ds), labels_for(data, labels),
                                           static_cast<std::size_t>(p.cfg.w),
                                           static_cast<std::size_t>(p.train_windows));
  const BoostModel model = train_pipeline(fp, p.cfg);
  save_model(out, model);
  std::cerr << "trained " << model.rounds.size() << " rounds over " << model.locations.size()
            << " locations; final loss " << model.loss_history.back() << "\n";
  return kOk;
}

// Windows per label in first-appearance order; unlabeled packets form one stream.
std::vector<std::pair<std::string, std::vector<CsiPacket>>> streams_in_order(const Dataset& ds) {
  std::vector<std::pair<std::string, std::vector<CsiPacket>>> out;
  std::map<std::string, std::size_t> index;
  for (const auto& lp : ds.packets) {
    const std::string key = lp.label ? std::to_string(*lp.label) : "-";
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) out.push_back({key, {}});
    out[it->second].second.push_back(lp.packet);
  }
  return out;
}

int run_locate(const std::string& model_path, const std::string& data, int k, int w) {
  const BoostModel model = load_model(model_path);
  const Dataset ds = load_dataset(data);
  const auto window = static_cast<std::size_t>(w > 0 ? w : model.window_size);
  std::cout << "window_index, discrete_id, x, y, latency_ms, top_k\n";
  std::size_t index = 0;
  for (const auto& [key, packets] : streams_in_order(ds)) {
    for (const auto& win : build_windows(packets, window, window)) {
      const LocationEstimate est = locate(model, win, static_cast<std::size_t>(k));
      std::cout << index++ << ", " << est.discrete_id << ", " << format_double(est.continuous.x)
                << ", " << format_double(est.continuous.y) << ", " << est.latency_ms << ", ";
      for (std::size_t i = 0; i < est.top.size(); ++i) {
        std::cout << (i ? ";" : "") << est.top[i].first << ":" << format_double(est.top[i].second);
      }
      std::cout << "\n";
    }
  }
  return kOk;
}

nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json cdf = nlohmann::json::array();
  for (const auto& [e, p] : r.cdf) cdf.push_back({e, p});
  return {{"median_error_m", r.median_error},
          {"discrete_median_error_m", r.discrete_median_error},
          {"windows", r.errors.size()},
          {"latency_ms", {{"mean", r.mean_latency_ms}, {"p50", r.p50_latency_ms}, {"p95", r.p95_latency_ms}}},
          {"config", r.config},
          {"errors_m", r.errors},
          {"cdf", cdf}};
}

int run_evaluate(const std::string& model_path, const std::string& data, const std::string& labels,
                 int k, int w) {
  const BoostModel model = load_model(model_path);
  const Dataset ds = load_dataset(data);
  for (const auto& lp : ds.packets) {
    if (!lp.label) throw MalformedInputError("evaluation data contains unlabeled packets");
  }
  const auto window = static_cast<std::size_t>(w > 0 ? w : model.window_size);
  const auto tests = labeled_windows(packets_by_label(ds), labels_for(data, labels), window);
  const EvalReport report = evaluate(model, tests, static_cast<std::size_t>(k));
  std::cout << report_json(report).dump(2) << "\n";
  return kOk;
}

int run_sweep(ExperimentConfig cfg, PipelineFlags p, std::uint64_t seed, const std::string& param,
              const std::string& values, const std::string& points) {
  p.cfg.seed = seed;
  cfg.scenario.seed = seed;
  cfg.pipeline = p.cfg;
  cfg.train_windows = p.train_windows;
  if (!p.links.empty()) cfg.pipeline.links = parse_link_subset(p.links, cfg.scenario.n);
  if (points == "midpoints") cfg.test_points = TestPoints::Midpoints;

  // Link subsets contain commas, so their values are ';'-separated.
  const char sep = param == "links" ? ';' : ',';
  std::vector<std::string> list;
  std::string cur;
  for (char ch : values) {
    if (ch == sep) {
      list.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  list.push_back(cur);

  std::cout << "parameter, value, mean_median_error_m, std_median_error_m, runs, mean_latency_ms\n";
  for (const auto& pt : sweep(param, list, cfg)) {
    double latency = 0.0;
    for (const auto& r : pt.reports) latency += r.mean_latency_ms;
    latency /= static_cast<double>(pt.reports.size());
    std::cout << param << ", \"" << pt.value << "\", " << pt.mean_median << ", " << pt.std_median
              << ", " << pt.reports.size() << ", " << latency << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Device-free localization from single-link CSI profiles"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  ScenarioConfig scenario;
  PipelineFlags pipe;
  std::string out, data, labels, model, points = "grid", param, values;
  int packets = 2050;
  int k = 6;
  int w = 0;
  ExperimentConfig experiment;

  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic CSI dataset");
  add_scenario_flags(synth, scenario);
  synth->add_option("--f", scenario.f, "Sub-carriers")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--packets", packets, "Packets per link per point")->capture_default_str();
  synth->add_option("--points", points, "grid or midpoints")
      ->check(CLI::IsMember({"grid", "midpoints"}))
      ->capture_default_str();
  synth->add_option("--out", out, "Dataset path; labels go to <out>.labels")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a model from a labelled dataset");
  add_pipeline_flags(train_cmd, pipe, true);
  train_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--data", data, "Labelled dataset")->required();
  train_cmd->add_option("--labels", labels, "Label coordinates (default <data>.labels)");
  train_cmd->add_option("--out", out, "Model path")->required();

  auto* locate_cmd = app.add_subcommand("locate", "Estimate locations for every window of a dataset");
  locate_cmd->add_option("--model", model, "Model file")->required();
  locate_cmd->add_option("--data", data, "Dataset (labels ignored)")->required();
  locate_cmd->add_option("--k", k, "Locations averaged")->capture_default_str();
  locate_cmd->add_option("--w", w, "Packets per window (default: training window)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model against labelled data");
  eval_cmd->add_option("--model", model, "Model file")->required();
  eval_cmd->add_option("--data", data, "Labelled dataset")->required();
  eval_cmd->add_option("--labels", labels, "Ground-truth coordinates (default <data>.labels)");
  eval_cmd->add_option("--k", k, "Locations averaged")->capture_default_str();
  eval_cmd->add_option("--w", w, "Packets per window (default: training window)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep on synthetic testbeds");
  add_scenario_flags(sweep_cmd, experiment.scenario);
  add_pipeline_flags(sweep_cmd, pipe, true);
  sweep_cmd->add_option("--seed", seed, "Base seed")->capture_default_str();
  sweep_cmd->add_option("--param", param, "w, f, k, d, g or links")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values (';' for links)")->required();
  sweep_cmd->add_option("--seeds", experiment.seeds, "Independent scenarios")->capture_default_str();
  sweep_cmd->add_option("--test-windows", experiment.test_windows, "Test windows per point")
      ->capture_default_str();
  sweep_cmd->add_option("--f-repeats", experiment.f_repeats, "Sub-carrier subsets per f value")
      ->capture_default_str();
  sweep_cmd->add_option("--points", points, "grid or midpoints")
      ->check(CLI::IsMember({"grid", "midpoints"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(scenario, seed, packets, points, out);
    if (*train_cmd) return run_train(pipe, seed, data, labels, out);
    if (*locate_cmd) return run_locate(model, data, k, w);
    if (*eval_cmd) return run_evaluate(model, data, labels, k, w);
    if (*sweep_cmd) return run_sweep(experiment, pipe, seed, param, values, points);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const MalformedInputError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kMalformed;
  } catch (const MissingLinkError& e) {
    std::cerr << "missing link: " << e.what() << "\n";
    return kMissingLink;
  } catch (const OutOfDomainError& e) {
    std::cerr << "out of domain: " << e.what() << "\n";
    return kOutOfDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
