#include "monostream/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "monostream/errors.hpp"

namespace monostream {

Posterior fuse(const ClassifierOutput& outputs, std::span<const double> prior) {
  const std::size_t n = outputs.scores.size();
  if (outputs.detections.size() != n || outputs.confidences.size() != n) {
    throw MalformedInputError("classifier output fields disagree in length");
  }
  if (n == 0) throw MalformedInputError("classifier output covers no locations");
  if (!prior.empty() && prior.size() != n) throw ConfigError("prior length mismatch");
  const auto prior_of = [&](std::size_t l) { return prior.empty() ? 1.0 : prior[l]; };

  Posterior post;
  post.source = outputs;
  post.probabilities.assign(n, 0.0);

  double positive_mass = 0.0;
  double positive_prior = 0.0;
  bool any_positive = false;
  for (std::size_t l = 0; l < n; ++l) {
    if (outputs.detections[l] != 1) continue;
    any_positive = true;
    positive_mass += outputs.confidences[l] * prior_of(l);
    positive_prior += prior_of(l);
  }

  if (any_positive && positive_mass > 0.0) {
    for (std::size_t l = 0; l < n; ++l) {
      if (outputs.detections[l] == 1) {
        post.probabilities[l] = outputs.confidences[l] * prior_of(l) / positive_mass;
      }
    }
  } else if (any_positive && positive_prior > 0.0) {
    for (std::size_t l = 0; l < n; ++l) {
      if (outputs.detections[l] == 1) post.probabilities[l] = prior_of(l) / positive_prior;
    }
  } else {
    const double top = *std::max_element(outputs.scores.begin(), outputs.scores.end());
    double total = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      post.probabilities[l] = prior_of(l) * std::exp(outputs.scores[l] - top);
      total += post.probabilities[l];
    }
    if (!(total > 0.0)) {
      std::fill(post.probabilities.begin(), post.probabilities.end(), 1.0 / static_cast<double>(n));
    } else {
      for (double& p : post.probabilities) p /= total;
    }
  }
  return post;
}

std::size_t estimate_discrete(const Posterior& posterior) {
  const auto& p = posterior.probabilities;
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<std::size_t> top_k(const Posterior& posterior, std::size_t k) {
  const auto& p = posterior.probabilities;
  if (k < 1 || k > p.size()) {
    throw ConfigError("k must lie in [1, " + std::to_string(p.size()) + "]");
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  order.resize(k);
  return order;
}

Point2 estimate_continuous(const Posterior& posterior, std::span<const Point2> coords,
                           std::size_t k) {
  if (coords.size() != posterior.probabilities.size()) {
    throw ConfigError("coordinate table does not match the posterior");
  }
  const auto top = top_k(posterior, k);
  if (top.size() == 1) return coords[top.front()];
  double total = 0.0;
  Point2 acc;
  for (std::size_t idx : top) {
    const double w = posterior.probabilities[idx];
    acc.x += w * coords[idx].x;
    acc.y += w * coords[idx].y;
    total += w;
  }
  if (!(total > 0.0)) return coords[estimate_discrete(posterior)];
  return {acc.x / total, acc.y / total};
}

LocationEstimate locate(const BoostModel& model, const CsiWindow& window, std::size_t k) {
  const auto start = std::chrono::steady_clock::now();

  const CsiWindow clean = preprocess(window, model.config.preprocessing);
  const FeatureVector features = extract_features(clean, model.bank, model.pairs);
  LocationEstimate est;
  est.posterior = fuse(classify(model, features));

  std::vector<Point2> coords;
  coords.reserve(model.locations.size());
  for (const auto& loc : model.locations) coords.push_back(loc.coords);

  const std::size_t best = estimate_discrete(est.posterior);
  est.discrete_id = model.locations[best].id;
  est.discrete_coords = coords[best];
  est.continuous = estimate_continuous(est.posterior, coords, k);
  est.k_used = k;
  for (std::size_t idx : top_k(est.posterior, k)) {
    est.top.emplace_back(model.locations[idx].id, est.posterior.probabilities[idx]);
  }

  est.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return est;
}

}  // namespace monostream
