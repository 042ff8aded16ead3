#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "monostream/errors.hpp"
#include "monostream/joint_boost.hpp"
#include "support.hpp"

using namespace monostream;

namespace {

const LinkId kA{0, 0};

Matrix column(std::vector<double> values) {
  Matrix m(values.size(), 1);
  m.data = std::move(values);
  return m;
}

// Member-only weighted squared error of the best stump, by exhaustive search
// over every feature and every midpoint between distinct values.
double exhaustive_member_error(const Matrix& x, const Matrix& z, const Matrix& w,
                               const std::vector<int>& members) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::set<double> distinct;
    for (std::size_t i = 0; i < x.rows; ++i) distinct.insert(x(i, f));
    std::vector<double> thresholds;
    for (auto it = distinct.begin(); std::next(it) != distinct.end(); ++it) {
      thresholds.push_back(0.5 * (*it + *std::next(it)));
    }
    if (thresholds.empty()) thresholds.push_back(*distinct.begin());
    for (double t : thresholds) {
      double aw = 0, awz = 0, bw = 0, bwz = 0;
      for (int c : members)
        for (std::size_t i = 0; i < x.rows; ++i) {
          (x(i, f) > t ? aw : bw) += w(i, c);
          (x(i, f) > t ? awz : bwz) += w(i, c) * z(i, c);
        }
      const double a = aw > 0 ? awz / aw : 0.0;
      const double b = bw > 0 ? bwz / bw : 0.0;
      double err = 0;
      for (int c : members)
        for (std::size_t i = 0; i < x.rows; ++i) {
          const double r = z(i, c) - (x(i, f) > t ? a : b);
          err += w(i, c) * r * r;
        }
      best = std::min(best, err);
    }
  }
  return best;
}

// Two locations whose windows sit in different magnitude bands.
Fingerprint separable_fingerprint(std::mt19937_64& rng) {
  Fingerprint fp;
  for (int loc = 0; loc < 2; ++loc) {
    FingerprintLocation l{loc * 10, {static_cast<double>(loc), 0.0}, {}};
    for (int k = 0; k < 6; ++k) {
      l.windows.push_back(testing_support::random_window(rng, {kA}, 20, 8, 30.0 + 20.0 * loc,
                                                         38.0 + 20.0 * loc));
    }
    fp.locations.push_back(std::move(l));
  }
  fp.bounds = magnitude_bounds(fp);
  return fp;
}

TrainConfig small_config(int rounds) {
  TrainConfig cfg;
  cfg.boost.rounds = rounds;
  return cfg;
}

}  // namespace

TEST_CASE("a perfect split lands on the midpoint with unit responses") {
  const Matrix x = column({1, 2, 3, 4});
  Matrix z(4, 1);
  z.data = {-1, -1, 1, 1};
  const Matrix w(4, 1, 1.0);
  const std::vector<int> subset{0};
  const std::vector<int> candidates{0};
  auto fit = fit_shared_stump(x, z, w, subset, candidates);
  CHECK(fit.stump.threshold == doctest::Approx(2.5));
  CHECK(fit.stump.above == doctest::Approx(1.0));
  CHECK(fit.stump.below == doctest::Approx(-1.0));
  CHECK(fit.member_error == doctest::Approx(0.0));
}

TEST_CASE("constant targets give a constant stump") {
  const Matrix x = column({5, 1, 3});
  const Matrix z(3, 1, 1.0);
  const Matrix w(3, 1, 1.0);
  const std::vector<int> subset{0};
  const std::vector<int> candidates{0};
  auto fit = fit_shared_stump(x, z, w, subset, candidates);
  CHECK(fit.stump.above == doctest::Approx(1.0));
  CHECK(fit.stump.below == doctest::Approx(1.0));
  CHECK(fit.error == doctest::Approx(0.0));
}

TEST_CASE("non-members receive their weighted mean label") {
  const Matrix x = column({0, 1, 2, 3});
  Matrix z(4, 2);
  z.data = {1, -1, 1, 1, -1, -1, -1, 1};
  Matrix w(4, 2, 1.0);
  w(0, 1) = 3.0;
  const std::vector<int> subset{0};
  const std::vector<int> candidates{0};
  auto fit = fit_shared_stump(x, z, w, subset, candidates);
  CHECK(fit.stump.offsets[0] == 0.0);
  CHECK(fit.stump.offsets[1] == doctest::Approx((-3.0 + 1 - 1 + 1) / 6.0));
}

TEST_CASE("property: stump fit matches exhaustive search and ignores weight scale") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 12 + trial % 7, classes = 4, features = 3;
    Matrix x(n, features), z(n, classes, -1.0), w(n, classes);
    for (double& v : x.data) v = std::round(u(rng) * 8.0) / 8.0;
    for (std::size_t i = 0; i < n; ++i) z(i, i % classes) = 1.0;
    for (double& v : w.data) v = 0.1 + u(rng);
    const std::vector<int> subset{0, static_cast<int>(1 + trial % 3)};
    const std::vector<int> candidates{0, 1, 2};

    auto fit = fit_shared_stump(x, z, w, subset, candidates);
    CHECK(fit.member_error == doctest::Approx(exhaustive_member_error(x, z, w, fit.stump.members)).epsilon(1e-9));

    Matrix doubled = w;
    for (double& v : doubled.data) v *= 2.0;
    auto fit2 = fit_shared_stump(x, z, doubled, subset, candidates);
    CHECK(fit2.stump.feature == fit.stump.feature);
    CHECK(fit2.stump.threshold == fit.stump.threshold);
    CHECK(fit2.stump.above == doctest::Approx(fit.stump.above));
    CHECK(fit2.stump.below == doctest::Approx(fit.stump.below));
  }
}

TEST_CASE("boosting trace") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = 60, classes = 3, features = 8;
  Matrix x(n, features);
  std::vector<int> cls(n);
  for (std::size_t i = 0; i < n; ++i) {
    cls[i] = static_cast<int>(i % classes);
    for (std::size_t f = 0; f < features; ++f) x(i, f) = noise(rng) + (f == i % classes ? 1.5 : 0.0);
  }
  BoostOptions opt;
  opt.rounds = 40;
  auto trace = run_joint_boost(x, cls, classes, opt);

  REQUIRE(trace.loss.size() == 41);
  CHECK(trace.loss.front() == doctest::Approx(1.0));
  for (std::size_t r = 1; r < trace.loss.size(); ++r) CHECK(trace.loss[r] <= trace.loss[r - 1] + 1e-9);
  for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
    CHECK(trace.stump_error[r] <= trace.zero_stump_error[r] + 1e-9);
  }

  std::set<int> used;
  for (const auto& s : trace.rounds) used.insert(s.feature);
  CHECK(used.size() <= trace.rounds.size());

  opt.candidate_features = 3;
  auto sub_a = run_joint_boost(x, cls, classes, opt);
  auto sub_b = run_joint_boost(x, cls, classes, opt);
  CHECK(sub_a.rounds == sub_b.rounds);
  CHECK(sub_a.loss == sub_b.loss);

  CHECK_THROWS_AS(run_joint_boost(x, cls, 1, opt), ConfigError);
}

TEST_CASE("scores of a concatenated ensemble are the sum of per-round scores") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 40, classes = 4;
  Matrix x(n, 5);
  for (double& v : x.data) v = u(rng);
  std::vector<int> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = static_cast<int>(i % classes);
  BoostOptions opt;
  opt.rounds = 15;
  auto trace = run_joint_boost(x, cls, classes, opt);
  for (std::size_t i = 0; i < n; ++i) {
    auto whole = ensemble_scores(trace.rounds, classes, x.row(i));
    std::vector<double> summed(classes, 0.0);
    for (const auto& s : trace.rounds) {
      auto part = ensemble_scores(std::span<const SharedStump>(&s, 1), classes, x.row(i));
      for (std::size_t c = 0; c < classes; ++c) summed[c] += part[c];
    }
    for (std::size_t c = 0; c < classes; ++c) CHECK(whole[c] == doctest::Approx(summed[c]).epsilon(1e-12));
  }
}

TEST_CASE("hand-evaluated single stump") {
  BoostModel model;
  model.locations = {{0, {}}, {1, {}}};
  model.pairs = {{0, 1}};
  model.rounds = {SharedStump{0, 0.1, 2.0, -1.0, {0}, {0.0, -0.5}}};
  const std::vector<double> above{0.3};
  auto out = classify(model, above);
  CHECK(out.scores[0] == 2.0);
  CHECK(out.confidences[0] == 2.0);
  CHECK(out.detections[0] == 1);
  CHECK(out.scores[1] == -0.5);
  CHECK(out.detections[1] == -1);
  CHECK(out.confidences[1] == 0.0);

  const std::vector<double> wrong_length{0.3, 0.2};
  CHECK_THROWS_AS(classify(model, wrong_length), MalformedInputError);
}

TEST_CASE("training on separable locations") {
  std::mt19937_64 rng(6);
  const Fingerprint fp = separable_fingerprint(rng);
  const auto links = fp.links();
  const FilterBank bank = sample_filter_bank(3, 12, links, fp.bounds, 8);
  const auto pairs = all_pairs(12);

  SUBCASE("five rounds classify every training window correctly") {
    auto model = train(fp, bank, pairs, small_config(5));
    CHECK(model.rounds.size() == 5);
    CHECK(model.window_size == 20);
    for (std::size_t l = 0; l < fp.locations.size(); ++l) {
      for (const auto& win : fp.locations[l].windows) {
        auto out = classify(model, extract_features(preprocess(win, model.config.preprocessing), bank, pairs));
        CHECK(out.detections[l] == 1);
        CHECK(out.detections[1 - l] == -1);
      }
    }
  }
  SUBCASE("no rounds means all scores zero and no detections") {
    auto model = train(fp, bank, pairs, small_config(0));
    auto out = classify(model, extract_features(fp.locations[0].windows[0], bank, pairs));
    CHECK(out.scores == std::vector<double>{0.0, 0.0});
    CHECK(out.detections == std::vector<int>{-1, -1});
  }
  SUBCASE("training is deterministic") {
    CHECK(train(fp, bank, pairs, small_config(8)) == train(fp, bank, pairs, small_config(8)));
  }
  SUBCASE("a location with identical windows still trains") {
    Fingerprint dup = fp;
    dup.locations[1].windows.assign(4, dup.locations[1].windows[0]);
    CHECK_NOTHROW(train(dup, bank, pairs, small_config(5)));
  }
  SUBCASE("a single location is rejected") {
    Fingerprint one = fp;
    one.locations.pop_back();
    CHECK_THROWS_AS(train(one, bank, pairs, small_config(5)), ConfigError);
  }
}
