#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "monostream/csi_model.hpp"
#include "monostream/feature_bank.hpp"

namespace monostream {

/// Dense row-major matrix, rows = samples.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// Regression stump shared by a subset of the per-location classifiers.
///
/// Members respond `above` when the feature exceeds `threshold` and `below`
/// otherwise; every other location adds its own constant from `offsets`.
struct SharedStump {
  /// Index into the model's FeaturePair sequence.
  int feature = 0;
  double threshold = 0.0;
  double above = 0.0;
  double below = 0.0;
  /// Location indices, ascending, never empty.
  std::vector<int> members;
  /// One entry per location; zero for members.
  std::vector<double> offsets;

  /// +1 when the stump votes for its members above the threshold.
  int sign() const { return above >= below ? 1 : -1; }
  bool operator==(const SharedStump&) const = default;
};

struct StumpFit {
  SharedStump stump;
  /// Weighted squared error over member classes only.
  double member_error = 0.0;
  /// Member error plus the error of the non-member constants, i.e. the
  /// objective compared across subsets.
  double error = 0.0;
};

/// Best shared stump for a fixed subset. `labels` and `weights` are samples x
/// locations with labels in {-1, +1}. Thresholds are the midpoints between
/// consecutive distinct values of each candidate feature; `above` and `below`
/// are the member-weighted means of the labels on either side. Ties go to the
/// lowest feature index, then the lowest threshold.
StumpFit fit_shared_stump(const Matrix& features, const Matrix& labels, const Matrix& weights,
                          std::span<const int> subset, std::span<const int> candidates);

struct BoostOptions {
  int rounds = 700;
  /// Features examined per round; 0 examines all.
  std::size_t candidate_features = 0;
  /// Upper bound on thresholds per feature; features with more distinct values
  /// are bucketed by quantile. 0 examines every midpoint.
  std::size_t max_thresholds = 64;
  std::uint64_t seed = 1;

  bool operator==(const BoostOptions&) const = default;
};

struct BoostTrace {
  std::vector<SharedStump> rounds;
  /// Mean of exp(-z * H) over every (sample, location) pair; entry 0 is the
  /// empty ensemble, entry r follows round r.
  std::vector<double> loss;
  /// Weighted squared error of each accepted stump and of the zero stump it
  /// replaced.
  std::vector<double> stump_error;
  std::vector<double> zero_stump_error;
};

/// Joint gentle boosting over a precomputed feature matrix.
/// `sample_class[i]` is the location index of row i.
BoostTrace run_joint_boost(const Matrix& features, std::span<const int> sample_class,
                           std::size_t classes, const BoostOptions& options);

struct TrainConfig {
  BoostOptions boost;
  Preprocessing preprocessing;

  bool operator==(const TrainConfig&) const = default;
};

struct ModelLocation {
  int id = 0;
  Point2 coords;

  bool operator==(const ModelLocation&) const = default;
};

struct BoostModel {
  /// Sorted by id; posterior and stump member indices refer to this order.
  std::vector<ModelLocation> locations;
  FilterBank bank;
  std::vector<FeaturePair> pairs;
  std::vector<SharedStump> rounds;
  LinkBounds bounds;
  TrainConfig config;
  /// Sub-carrier count of the raw data the model was trained on.
  int source_subcarriers = 0;
  /// Packets per link in each training window; the default online window.
  int window_size = 0;
  std::vector<double> loss_history;

  bool operator==(const BoostModel&) const = default;
};

struct ClassifierOutput {
  std::vector<double> scores;
  /// +1 or -1 per location.
  std::vector<int> detections;
  std::vector<double> confidences;

  /// d = sign(H) with -1 at H == 0, c = max(0, H).
  static ClassifierOutput from_scores(std::vector<double> scores);
};

/// Feature matrix for a set of windows, after the model's preprocessing.
Matrix feature_matrix(std::span<const CsiWindow> windows, const FilterBank& bank,
                      std::span<const FeaturePair> pairs, const Preprocessing& prep);

/// Trains one classifier per fingerprint location. The fingerprint must carry
/// bounds and at least two windows per location.
BoostModel train(const Fingerprint& fingerprint, const FilterBank& bank,
                 std::span<const FeaturePair> pairs, const TrainConfig& config);

/// Additive scores H_l of an ensemble.
std::vector<double> ensemble_scores(std::span<const SharedStump> rounds, std::size_t locations,
                                    std::span<const double> features);

ClassifierOutput classify(const BoostModel& model, std::span<const double> features);
ClassifierOutput classify(const BoostModel& model, const FeatureVector& features);

}  // namespace monostream
