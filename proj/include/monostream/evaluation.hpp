#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monostream/csi_model.hpp"
#include "monostream/dataset_io.hpp"
#include "monostream/joint_boost.hpp"
#include "monostream/synth_env.hpp"

namespace monostream {

/// End-to-end knobs. Field names follow the usual parameter letters.
struct PipelineConfig {
  /// Packets per link per window.
  int w = 500;
  /// Context filters.
  int d = 100;
  /// Boosting rounds.
  int g = 700;
  /// Locations averaged by the continuous estimator.
  int k = 6;
  /// Sub-carriers kept (seeded random subset); 0 keeps all.
  int f = 0;
  /// Feature pairs kept (seeded random subset); 0 keeps all C(d, 2).
  std::size_t pair_count = 0;
  std::size_t candidate_features = 0;
  std::size_t max_thresholds = 64;
  double outlier_threshold = kDefaultOutlierThreshold;
  std::uint64_t seed = 1;
  /// Links used; empty uses every link in the data.
  std::vector<LinkId> links;
};

/// Groups labelled packet streams into fingerprint windows (stride w/2).
/// `max_windows` = 0 keeps every window.
Fingerprint build_fingerprint(const std::map<int, std::vector<CsiPacket>>& streams,
                              const LabelTable& coords, std::size_t w,
                              std::size_t max_windows = 0);

/// Samples the filter bank and pairs, then trains, all seeded from `config.seed`.
BoostModel train_pipeline(const Fingerprint& fingerprint, const PipelineConfig& config);

struct LabeledWindow {
  CsiWindow window;
  Point2 truth;
  int label = 0;
};

/// Non-overlapping windows of `w` packets per label, at most `max_per_label`
/// each (0 = all). Labels missing from `coords` raise MalformedInputError.
std::vector<LabeledWindow> labeled_windows(const std::map<int, std::vector<CsiPacket>>& streams,
                                           const LabelTable& coords, std::size_t w,
                                           std::size_t max_per_label = 0);

struct EvalReport {
  /// Continuous-estimate distance error per window, metres, in window order.
  std::vector<double> errors;
  double median_error = 0.0;
  /// (error, fraction of windows with error <= it) at every distinct error.
  std::vector<std::pair<double, double>> cdf;
  /// Same for the discrete estimate.
  double discrete_median_error = 0.0;
  std::vector<double> latencies_ms;
  double mean_latency_ms = 0.0;
  double p50_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
  std::map<std::string, std::string> config;
};

double median(std::vector<double> values);
double percentile(std::vector<double> values, double q);
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

/// Locates every window and scores the continuous estimate against its truth.
/// Throws MalformedInputError on an empty test set.
EvalReport evaluate(const BoostModel& model, std::span<const LabeledWindow> tests, std::size_t k);

enum class TestPoints { Grid, Midpoints };

struct ExperimentConfig {
  ScenarioConfig scenario;
  PipelineConfig pipeline;
  int train_windows = 40;
  int test_windows = 20;
  /// Independent scenarios; seed s uses scenario.seed + s.
  int seeds = 1;
  /// Random sub-carrier subsets drawn per value when sweeping f.
  int f_repeats = 5;
  TestPoints test_points = TestPoints::Grid;
};

/// One synthetic testbed with its training fingerprint and held-out packets.
struct ExperimentData {
  Scenario scenario;
  Fingerprint fingerprint;
  LabelTable grid_coords;
  std::map<int, std::vector<CsiPacket>> grid_test;
  /// Midpoint test streams are labelled 1000 + cell index.
  LabelTable midpoint_coords;
  std::map<int, std::vector<CsiPacket>> midpoint_test;
};

inline constexpr int kMidpointLabelBase = 1000;

/// `test_packets` per link at every test point (at least test_windows * w).
ExperimentData generate_experiment(const ExperimentConfig& config, std::uint64_t scenario_seed,
                                   int test_packets);

std::vector<LabeledWindow> test_set(const ExperimentData& data, TestPoints points, std::size_t w,
                                    std::size_t count);

/// Dataset + label table for packets at grid locations (labels = location ids).
std::pair<Dataset, LabelTable> grid_dataset(const Scenario& scenario, int packets_per_location,
                                            std::uint64_t seed);
/// Dataset + label table for packets at cell midpoints.
std::pair<Dataset, LabelTable> midpoint_dataset(const Scenario& scenario,
                                                int packets_per_point, std::uint64_t seed);

struct SweepPoint {
  std::string value;
  /// One per (seed, repeat).
  std::vector<EvalReport> reports;
  double mean_median = 0.0;
  double std_median = 0.0;
};

/// Parameter sweep over w, f, k, d, g or links. w and k reuse one model per
/// seed; d, f and links retrain; g trains once at the largest value and
/// truncates, which equals retraining because rounds are sequential. A links
/// value is either a "tx-rx,..." list or "rx:a,b" (those receive antennas on
/// every transmitter); the value "rx-combos" expands to every non-empty
/// receive-antenna subset. Link sweeps come back ranked by mean median error.
std::vector<SweepPoint> sweep(const std::string& parameter, const std::vector<std::string>& values,
                              const ExperimentConfig& base);

/// Links named by a sweep value (see sweep()).
std::vector<LinkId> parse_link_subset(const std::string& value, int n_tx);

/// Every non-empty receive-antenna subset over all transmitters.
std::vector<std::vector<LinkId>> receiver_combinations(int n_tx, int n_rx);

/// Picks the candidate link subset with the lowest validation median error.
/// The last `validation_fraction` of each location's windows is held out.
/// When `quality` is given, subsets are ranked by mean per-link quality
/// (higher is better) instead and nothing is trained. Ties go to the smaller
/// subset, then the lexicographically smaller one.
std::vector<LinkId> select_links(const Fingerprint& fingerprint,
                                 std::span<const std::vector<LinkId>> candidates,
                                 double validation_fraction, const PipelineConfig& config,
                                 const std::map<LinkId, double>* quality = nullptr);

}  // namespace monostream
