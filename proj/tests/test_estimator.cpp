#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "monostream/errors.hpp"
#include "monostream/estimator.hpp"
#include "support.hpp"

using namespace monostream;

namespace {

Posterior from(std::vector<double> p) { return Posterior{std::move(p), {}}; }

double total(const Posterior& p) {
  return std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0);
}

}  // namespace

TEST_CASE("fusion over positive detections") {
  SUBCASE("one positive takes all the mass") {
    auto p = fuse(ClassifierOutput::from_scores({-1.0, 0.4, -3.0}));
    CHECK(p.probabilities == std::vector<double>{0.0, 1.0, 0.0});
  }
  SUBCASE("confidences 2 and 1") {
    auto p = fuse(ClassifierOutput::from_scores({2.0, 1.0, -0.5}));
    CHECK(p.probabilities[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p.probabilities[1] == doctest::Approx(1.0 / 3.0));
    CHECK(p.probabilities[2] == 0.0);
  }
  SUBCASE("no positives falls back to a soft-max over scores") {
    auto p = fuse(ClassifierOutput::from_scores({-1.0, -2.0}));
    const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
    CHECK(p.probabilities[0] == doctest::Approx(e1 / (e1 + e2)));
    CHECK(p.probabilities[1] == doctest::Approx(e2 / (e1 + e2)));
    CHECK(p.probabilities[0] == doctest::Approx(0.731).epsilon(1e-3));
  }
  SUBCASE("positive detections with zero confidence share uniformly") {
    ClassifierOutput out{{0.0, 0.0, -1.0}, {1, 1, -1}, {0.0, 0.0, 0.0}};
    auto p = fuse(out);
    CHECK(p.probabilities == std::vector<double>{0.5, 0.5, 0.0});
  }
  SUBCASE("a prior reweights the positives") {
    const std::vector<double> prior{1.0, 3.0, 1.0};
    auto p = fuse(ClassifierOutput::from_scores({1.0, 1.0, -1.0}), prior);
    CHECK(p.probabilities[0] == doctest::Approx(0.25));
    CHECK(p.probabilities[1] == doctest::Approx(0.75));
  }
  SUBCASE("malformed outputs") {
    ClassifierOutput out{{1.0, 2.0}, {1}, {1.0, 2.0}};
    CHECK_THROWS_AS(fuse(out), MalformedInputError);
  }
}

TEST_CASE("property: posteriors sum to one and ignore confidence scale") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> score(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 30;
    std::vector<double> scores(n);
    for (double& s : scores) s = score(rng) - (trial % 3 == 0 ? 20.0 : 0.0);
    auto base = ClassifierOutput::from_scores(scores);
    auto p = fuse(base);
    CHECK(std::abs(total(p) - 1.0) <= 1e-9);

    ClassifierOutput scaled = base;
    for (double& c : scaled.confidences) c *= 7.3;
    auto q = fuse(scaled);
    for (std::size_t l = 0; l < n; ++l) CHECK(std::abs(p.probabilities[l] - q.probabilities[l]) <= 1e-9);
  }
}

TEST_CASE("discrete estimate") {
  CHECK(estimate_discrete(from({1.0, 0.0, 0.0})) == 0);
  CHECK(estimate_discrete(from({0.5, 0.5})) == 0);
  CHECK(estimate_discrete(fuse(ClassifierOutput::from_scores({2.0, 1.0}))) == 0);
}

TEST_CASE("continuous estimate") {
  const std::vector<Point2> coords{{0, 0}, {3, 0}, {0, 4}};
  SUBCASE("k = 1 reduces to the argmax") {
    CHECK(estimate_continuous(from({0.2, 0.7, 0.1}), coords, 1) == Point2{3, 0});
  }
  SUBCASE("k = 2 weighted average") {
    auto p = estimate_continuous(from({2.0 / 3.0, 1.0 / 3.0, 0.0}), coords, 2);
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(0.0));
  }
  SUBCASE("k outside [1, L]") {
    CHECK_THROWS_AS(estimate_continuous(from({0.5, 0.5, 0.0}), coords, 0), ConfigError);
    CHECK_THROWS_AS(estimate_continuous(from({0.5, 0.5, 0.0}), coords, 4), ConfigError);
  }
  SUBCASE("ties in the top-k go to the lower index") {
    CHECK(top_k(from({0.25, 0.5, 0.25}), 2) == std::vector<std::size_t>{1, 0});
  }
}

TEST_CASE("property: continuous estimate stays inside the top-k bounding box") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + trial % 10;
    std::vector<Point2> coords(n);
    std::vector<double> p(n);
    for (auto& c : coords) c = {10 * u(rng), 10 * u(rng)};
    for (double& v : p) v = u(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= s;
    const std::size_t k = 1 + trial % n;
    const Posterior post = from(p);
    const Point2 est = estimate_continuous(post, coords, k);
    double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
    for (std::size_t idx : top_k(post, k)) {
      xmin = std::min(xmin, coords[idx].x);
      xmax = std::max(xmax, coords[idx].x);
      ymin = std::min(ymin, coords[idx].y);
      ymax = std::max(ymax, coords[idx].y);
    }
    CHECK(est.x >= xmin - 1e-12);
    CHECK(est.x <= xmax + 1e-12);
    CHECK(est.y >= ymin - 1e-12);
    CHECK(est.y <= ymax + 1e-12);
  }
}

TEST_CASE("locate on a separable pair of locations") {
  std::mt19937_64 rng(41);
  const LinkId link{0, 0};
  Fingerprint fp;
  for (int loc = 0; loc < 2; ++loc) {
    FingerprintLocation l{loc + 1, {2.0 * loc, 1.0}, {}};
    for (int k = 0; k < 5; ++k) {
      l.windows.push_back(testing_support::random_window(rng, {link}, 25, 6, 20.0 + 15.0 * loc, 28.0 + 15.0 * loc));
    }
    fp.locations.push_back(std::move(l));
  }
  fp.bounds = magnitude_bounds(fp);
  const auto links = fp.links();
  const auto bank = sample_filter_bank(9, 10, links, fp.bounds, 6);
  const auto pairs = all_pairs(10);
  TrainConfig cfg;
  cfg.boost.rounds = 10;
  const auto model = train(fp, bank, pairs, cfg);

  const CsiWindow probe = testing_support::random_window(rng, {link}, 25, 6, 35.0, 43.0);
  auto est = locate(model, probe, 1);
  CHECK(est.discrete_id == 2);
  CHECK(est.continuous == est.discrete_coords);
  CHECK(est.continuous == Point2{2.0, 1.0});
  CHECK(est.top.size() == 1);
  CHECK(est.latency_ms >= 0.0);

  auto est2 = locate(model, probe, 2);
  CHECK(est2.top.size() == 2);
  CHECK(est2.discrete_id == 2);
}
