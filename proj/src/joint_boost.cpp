#include "monostream/joint_boost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

#include "monostream/errors.hpp"

namespace monostream {

namespace {

// Candidate split points of one feature column. Samples with equal values
// always share a group; thresholds[g] separates group g from group g + 1.
struct FeatureGroups {
  std::vector<std::uint32_t> group_of;
  std::vector<double> thresholds;
  std::size_t groups = 1;
  double constant_value = 0.0;
};

FeatureGroups group_feature(const Matrix& features, std::size_t column, std::size_t max_groups) {
  const std::size_t n = features.rows;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return features(a, column) < features(b, column);
  });

  // Start index (in sorted order) of each run of equal values.
  std::vector<std::size_t> run_start;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || features(order[k], column) != features(order[k - 1], column)) {
      run_start.push_back(k);
    }
  }

  std::vector<std::size_t> group_start;
  if (max_groups == 0 || run_start.size() <= max_groups) {
    group_start = run_start;
  } else {
    // Quantile buckets, cut only at run boundaries.
    group_start.push_back(0);
    for (std::size_t q = 1; q < max_groups; ++q) {
      const std::size_t target = q * n / max_groups;
      auto it = std::lower_bound(run_start.begin(), run_start.end(), target);
      if (it == run_start.end()) break;
      if (*it > group_start.back()) group_start.push_back(*it);
    }
  }

  FeatureGroups out;
  out.groups = group_start.size();
  out.group_of.assign(n, 0);
  out.constant_value = n > 0 ? features(order[0], column) : 0.0;
  for (std::size_t g = 0; g < group_start.size(); ++g) {
    const std::size_t end = g + 1 < group_start.size() ? group_start[g + 1] : n;
    for (std::size_t k = group_start[g]; k < end; ++k) {
      out.group_of[order[k]] = static_cast<std::uint32_t>(g);
    }
    if (g + 1 < group_start.size()) {
      const double last = features(order[end - 1], column);
      const double next = features(order[end], column);
      out.thresholds.push_back(0.5 * (last + next));
    }
  }
  return out;
}

// A*A/W for a region, clamped so cancellation in tiny regions cannot inflate it.
inline double region_gain(double a, double w) {
  if (!(w > 0.0)) return 0.0;
  return std::min(a * a, w * w) / w;
}

struct SplitChoice {
  double gain = -std::numeric_limits<double>::infinity();
  std::size_t candidate = 0;
  std::size_t threshold = 0;
};

// Per-class weight sums inside every (candidate feature, group) cell for one
// boosting round, plus the scan that finds the best split for a subset.
class SplitSearch {
 public:
  SplitSearch(const std::vector<FeatureGroups>& groups, std::span<const int> candidates,
              std::size_t classes)
      : groups_(groups), candidates_(candidates.begin(), candidates.end()), classes_(classes) {
    offsets_.reserve(candidates_.size() + 1);
    std::size_t total = 0;
    for (int f : candidates_) {
      offsets_.push_back(total);
      total += groups_[f].groups;
    }
    offsets_.push_back(total);
    cells_ = total;
    w_.assign(classes_ * cells_, 0.0);
    wz_.assign(classes_ * cells_, 0.0);
    class_w_.assign(classes_, 0.0);
    class_wz_.assign(classes_, 0.0);
  }

  void accumulate(const Matrix& labels, const Matrix& weights) {
    const std::size_t n = weights.rows;
    std::vector<double> w(n);
    std::vector<double> wz(n);
    for (std::size_t c = 0; c < classes_; ++c) {
      double tw = 0.0;
      double twz = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = weights(i, c);
        wz[i] = w[i] * labels(i, c);
        tw += w[i];
        twz += wz[i];
      }
      class_w_[c] = tw;
      class_wz_[c] = twz;
      double* cw = w_.data() + c * cells_;
      double* cwz = wz_.data() + c * cells_;
      for (std::size_t k = 0; k < candidates_.size(); ++k) {
        const auto& gof = groups_[candidates_[k]].group_of;
        double* kw = cw + offsets_[k];
        double* kwz = cwz + offsets_[k];
        for (std::size_t i = 0; i < n; ++i) {
          kw[gof[i]] += w[i];
          kwz[gof[i]] += wz[i];
        }
      }
    }
  }

  std::size_t classes() const { return classes_; }
  std::size_t cells() const { return cells_; }
  double class_weight(std::size_t c) const { return class_w_[c]; }
  double class_weighted_label(std::size_t c) const { return class_wz_[c]; }
  const double* class_w(std::size_t c) const { return w_.data() + c * cells_; }
  const double* class_wz(std::size_t c) const { return wz_.data() + c * cells_; }
  int feature(std::size_t candidate) const { return candidates_[candidate]; }

  // Best split for (base + extra). `base_*` may be null for an empty base.
  SplitChoice scan(const double* base_w, const double* base_wz, const double* extra_w,
                   const double* extra_wz, double total_w, double total_wz) const {
    SplitChoice best;
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
      const std::size_t o = offsets_[k];
      const std::size_t ng = offsets_[k + 1] - o;
      if (ng == 1) {
        const double gain = region_gain(total_wz, total_w);
        if (gain > best.gain) best = {gain, k, 0};
        continue;
      }
      double bw = 0.0;
      double bwz = 0.0;
      for (std::size_t g = 0; g + 1 < ng; ++g) {
        bw += extra_w[o + g];
        bwz += extra_wz[o + g];
        if (base_w != nullptr) {
          bw += base_w[o + g];
          bwz += base_wz[o + g];
        }
        const double gain = region_gain(bwz, bw) + region_gain(total_wz - bwz, total_w - bw);
        if (gain > best.gain) best = {gain, k, g};
      }
    }
    return best;
  }

 private:
  const std::vector<FeatureGroups>& groups_;
  std::vector<int> candidates_;
  std::size_t classes_;
  std::vector<std::size_t> offsets_;
  std::size_t cells_ = 0;
  std::vector<double> w_;
  std::vector<double> wz_;
  std::vector<double> class_w_;
  std::vector<double> class_wz_;
};

double threshold_of(const FeatureGroups& g, std::size_t t) {
  return g.groups == 1 ? g.constant_value : g.thresholds[t];
}

// Closed-form responses and exact objective for a chosen (subset, feature, threshold).
StumpFit finish_stump(const Matrix& features, const Matrix& labels, const Matrix& weights,
                      std::vector<int> members, int feature, double threshold) {
  const std::size_t n = features.rows;
  const std::size_t classes = labels.cols;
  std::vector<char> is_member(classes, 0);
  for (int c : members) is_member[c] = 1;

  double aw = 0.0, awz = 0.0, bw = 0.0, bwz = 0.0;
  for (int c : members) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights(i, c);
      if (features(i, feature) > threshold) {
        aw += w;
        awz += w * labels(i, c);
      } else {
        bw += w;
        bwz += w * labels(i, c);
      }
    }
  }

  StumpFit fit;
  SharedStump& s = fit.stump;
  s.feature = feature;
  s.threshold = threshold;
  s.below = bw > 0.0 ? bwz / bw : 0.0;
  s.above = aw > 0.0 ? awz / aw : s.below;
  if (!(bw > 0.0)) s.below = s.above;
  s.members = std::move(members);
  s.offsets.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    if (is_member[c]) continue;
    double w = 0.0, wz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w += weights(i, c);
      wz += weights(i, c) * labels(i, c);
    }
    s.offsets[c] = w > 0.0 ? wz / w : 0.0;
  }

  for (std::size_t c = 0; c < classes; ++c) {
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double h = s.offsets[c];
      if (is_member[c]) h = features(i, feature) > threshold ? s.above : s.below;
      const double r = labels(i, c) - h;
      err += weights(i, c) * r * r;
    }
    if (is_member[c]) fit.member_error += err;
    fit.error += err;
  }
  return fit;
}

std::vector<FeatureGroups> group_all(const Matrix& features, std::span<const int> columns,
                                     std::size_t max_groups) {
  std::vector<FeatureGroups> groups(features.cols);
  for (int f : columns) groups[f] = group_feature(features, static_cast<std::size_t>(f), max_groups);
  return groups;
}

struct SubsetStep {
  double objective = std::numeric_limits<double>::infinity();
  SplitChoice split;
};

// Greedy forward growth of the shared subset: starts from the best single
// class and keeps the best subset seen along the path.
StumpFit best_shared_stump(const Matrix& features, const Matrix& labels, const Matrix& weights,
                           const std::vector<FeatureGroups>& groups,
                           std::span<const int> candidates) {
  const std::size_t classes = labels.cols;
  SplitSearch search(groups, candidates, classes);
  search.accumulate(labels, weights);

  std::vector<double> outside_error(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const double w = search.class_weight(c);
    outside_error[c] = w - region_gain(search.class_weighted_label(c), w);
  }

  std::vector<char> in_subset(classes, 0);
  std::vector<double> sum_w(search.cells(), 0.0);
  std::vector<double> sum_wz(search.cells(), 0.0);
  double subset_w = 0.0;
  double subset_wz = 0.0;
  double outside_total = std::accumulate(outside_error.begin(), outside_error.end(), 0.0);

  std::vector<int> path;
  SubsetStep best_step;
  std::size_t best_size = 0;

  for (std::size_t size = 1; size <= classes; ++size) {
    SubsetStep step;
    int chosen = -1;
    for (std::size_t c = 0; c < classes; ++c) {
      if (in_subset[c]) continue;
      const double tw = subset_w + search.class_weight(c);
      const double twz = subset_wz + search.class_weighted_label(c);
      SplitChoice split = search.scan(size == 1 ? nullptr : sum_w.data(),
                                      size == 1 ? nullptr : sum_wz.data(), search.class_w(c),
                                      search.class_wz(c), tw, twz);
      const double objective = tw - split.gain + (outside_total - outside_error[c]);
      if (objective < step.objective) {
        step = {objective, split};
        chosen = static_cast<int>(c);
      }
    }
    in_subset[chosen] = 1;
    path.push_back(chosen);
    subset_w += search.class_weight(chosen);
    subset_wz += search.class_weighted_label(chosen);
    outside_total -= outside_error[chosen];
    const double* cw = search.class_w(chosen);
    const double* cwz = search.class_wz(chosen);
    for (std::size_t g = 0; g < sum_w.size(); ++g) {
      sum_w[g] += cw[g];
      sum_wz[g] += cwz[g];
    }
    if (step.objective < best_step.objective) {
      best_step = step;
      best_size = size;
    }
  }

  std::vector<int> members(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(best_size));
  std::sort(members.begin(), members.end());
  const int feature = search.feature(best_step.split.candidate);
  return finish_stump(features, labels, weights, std::move(members), feature,
                      threshold_of(groups[feature], best_step.split.threshold));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

StumpFit fit_shared_stump(const Matrix& features, const Matrix& labels, const Matrix& weights,
                          std::span<const int> subset, std::span<const int> candidates) {
  if (candidates.empty()) throw ConfigError("no candidate features");
  if (subset.empty()) throw ConfigError("empty stump subset");
  if (labels.rows != features.rows || weights.rows != features.rows ||
      weights.cols != labels.cols) {
    throw MalformedInputError("feature, label and weight shapes disagree");
  }
  std::vector<int> sorted_candidates(candidates.begin(), candidates.end());
  std::sort(sorted_candidates.begin(), sorted_candidates.end());
  for (int f : sorted_candidates) {
    if (f < 0 || static_cast<std::size_t>(f) >= features.cols) {
      throw ConfigError("candidate feature out of range");
    }
  }
  std::vector<int> members(subset.begin(), subset.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());

  const auto groups = group_all(features, sorted_candidates, 0);
  SplitSearch search(groups, sorted_candidates, labels.cols);
  search.accumulate(labels, weights);

  std::vector<double> sum_w(search.cells(), 0.0);
  std::vector<double> sum_wz(search.cells(), 0.0);
  double tw = 0.0;
  double twz = 0.0;
  for (int c : members) {
    const double* cw = search.class_w(c);
    const double* cwz = search.class_wz(c);
    for (std::size_t g = 0; g < sum_w.size(); ++g) {
      sum_w[g] += cw[g];
      sum_wz[g] += cwz[g];
    }
    tw += search.class_weight(c);
    twz += search.class_weighted_label(c);
  }
  const std::vector<double> zeros(search.cells(), 0.0);
  const SplitChoice split = search.scan(sum_w.data(), sum_wz.data(), zeros.data(), zeros.data(), tw, twz);
  const int feature = search.feature(split.candidate);
  return finish_stump(features, labels, weights, std::move(members), feature,
                      threshold_of(groups[feature], split.threshold));
}

BoostTrace run_joint_boost(const Matrix& features, std::span<const int> sample_class,
                           std::size_t classes, const BoostOptions& options) {
  if (classes < 2) throw ConfigError("joint boosting needs at least two classes");
  if (options.rounds < 0) throw ConfigError("boosting rounds must be >= 0");
  if (sample_class.size() != features.rows) {
    throw MalformedInputError("sample labels do not match feature rows");
  }
  if (features.cols == 0) throw ConfigError("no features to boost on");
  const std::size_t n = features.rows;

  Matrix labels(n, classes, -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = sample_class[i];
    if (c < 0 || static_cast<std::size_t>(c) >= classes) {
      throw MalformedInputError("sample class out of range");
    }
    labels(i, static_cast<std::size_t>(c)) = 1.0;
  }
  Matrix weights(n, classes, 1.0);

  std::vector<int> all_columns(features.cols);
  std::iota(all_columns.begin(), all_columns.end(), 0);
  const auto groups = group_all(features, all_columns, options.max_thresholds);

  const std::size_t per_round = options.candidate_features == 0
                                    ? features.cols
                                    : std::min(options.candidate_features, features.cols);

  BoostTrace trace;
  const auto mean_weight = [&] {
    return std::accumulate(weights.data.begin(), weights.data.end(), 0.0) /
           static_cast<double>(weights.data.size());
  };
  trace.loss.push_back(mean_weight());

  std::vector<int> candidates;
  for (int r = 0; r < options.rounds; ++r) {
    if (per_round == features.cols) {
      candidates = all_columns;
    } else {
      candidates.clear();
      std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(r)));
      std::sample(all_columns.begin(), all_columns.end(), std::back_inserter(candidates), per_round,
                  rng);
    }

    StumpFit fit = best_shared_stump(features, labels, weights, groups, candidates);
    trace.stump_error.push_back(fit.error);
    trace.zero_stump_error.push_back(
        std::accumulate(weights.data.begin(), weights.data.end(), 0.0));

    const SharedStump& s = fit.stump;
    std::vector<char> is_member(classes, 0);
    for (int c : s.members) is_member[c] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double member_response = features(i, s.feature) > s.threshold ? s.above : s.below;
      for (std::size_t c = 0; c < classes; ++c) {
        const double h = is_member[c] ? member_response : s.offsets[c];
        weights(i, c) *= std::exp(-labels(i, c) * h);
      }
    }
    trace.rounds.push_back(std::move(fit.stump));
    trace.loss.push_back(mean_weight());
  }
  return trace;
}

ClassifierOutput ClassifierOutput::from_scores(std::vector<double> scores) {
  ClassifierOutput out;
  out.detections.reserve(scores.size());
  out.confidences.reserve(scores.size());
  for (double h : scores) {
    out.detections.push_back(h > 0.0 ? 1 : -1);
    out.confidences.push_back(std::max(0.0, h));
  }
  out.scores = std::move(scores);
  return out;
}

Matrix feature_matrix(std::span<const CsiWindow> windows, const FilterBank& bank,
                      std::span<const FeaturePair> pairs, const Preprocessing& prep) {
  Matrix m(windows.size(), pairs.size());
  for (std::size_t r = 0; r < windows.size(); ++r) {
    const auto fv = extract_features(preprocess(windows[r], prep), bank, pairs);
    std::copy(fv.values.begin(), fv.values.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
  }
  return m;
}

BoostModel train(const Fingerprint& fingerprint, const FilterBank& bank,
                 std::span<const FeaturePair> pairs, const TrainConfig& config) {
  fingerprint.validate();
  if (pairs.empty()) throw ConfigError("no feature pairs");
  if (fingerprint.bounds.empty()) throw ConfigError("fingerprint has no magnitude bounds");

  BoostModel model;
  for (const auto& loc : fingerprint.locations) model.locations.push_back({loc.id, loc.coords});
  std::sort(model.locations.begin(), model.locations.end(),
            [](const ModelLocation& a, const ModelLocation& b) { return a.id < b.id; });

  std::vector<CsiWindow> windows;
  std::vector<int> sample_class;
  for (std::size_t idx = 0; idx < model.locations.size(); ++idx) {
    const int id = model.locations[idx].id;
    const auto& loc = *std::find_if(fingerprint.locations.begin(), fingerprint.locations.end(),
                                    [id](const FingerprintLocation& l) { return l.id == id; });
    if (loc.windows.size() < 2) {
      throw ConfigError("location " + std::to_string(id) + " has fewer than two training windows");
    }
    for (const auto& w : loc.windows) {
      windows.push_back(w);
      sample_class.push_back(static_cast<int>(idx));
    }
  }

  const Matrix features = feature_matrix(windows, bank, pairs, config.preprocessing);
  BoostTrace trace = run_joint_boost(features, sample_class, model.locations.size(), config.boost);

  model.bank = bank;
  model.pairs.assign(pairs.begin(), pairs.end());
  model.rounds = std::move(trace.rounds);
  model.loss_history = std::move(trace.loss);
  model.bounds = fingerprint.bounds;
  model.config = config;
  model.source_subcarriers = static_cast<int>(fingerprint.subcarrier_count());
  model.window_size = static_cast<int>(windows.front().window_size());
  return model;
}

std::vector<double> ensemble_scores(std::span<const SharedStump> rounds, std::size_t locations,
                                    std::span<const double> features) {
  std::vector<double> scores(locations, 0.0);
  for (const auto& s : rounds) {
    for (std::size_t l = 0; l < locations; ++l) scores[l] += s.offsets[l];
    const double response = features[s.feature] > s.threshold ? s.above : s.below;
    for (int m : s.members) scores[m] += response;
  }
  return scores;
}

ClassifierOutput classify(const BoostModel& model, std::span<const double> features) {
  if (features.size() != model.pairs.size()) {
    throw MalformedInputError("feature vector has " + std::to_string(features.size()) +
                              " entries, model expects " + std::to_string(model.pairs.size()));
  }
  return ClassifierOutput::from_scores(
      ensemble_scores(model.rounds, model.locations.size(), features));
}

ClassifierOutput classify(const BoostModel& model, const FeatureVector& features) {
  return classify(model, std::span<const double>(features.values));
}

}  // namespace monostream
