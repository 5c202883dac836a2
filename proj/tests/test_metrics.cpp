#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsbreak/metrics.hpp"
#include "tsbreak/rng.hpp"

using namespace tsbreak;

namespace {

LabelSet gt_of(std::vector<std::size_t> bps) {
  LabelSet g;
  g.breakpoints = std::move(bps);
  return g;
}

DetectionResult al_of(std::vector<std::size_t> bps) {
  DetectionResult d;
  d.breakpoints = std::move(bps);
  d.detector_id = "test";
  return d;
}

/// Exhaustive O(|GT|*|AL|) matcher: for every alarm find its nearest truth
/// by full scan (ties to the smaller index), check mutual nearest by full
/// scan, and apply the strict toleration. Written independently of the
/// library's binary-search matcher.
std::size_t oracle_match(const std::vector<std::size_t>& gt,
                         const std::vector<std::size_t>& al,
                         std::size_t tau) {
  const auto dist = [](std::size_t a, std::size_t b) {
    return a > b ? a - b : b - a;
  };
  std::size_t correct = 0;
  for (std::size_t i = 0; i < al.size(); ++i) {
    std::size_t best_b = 0;
    bool have_b = false;
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (!have_b || dist(al[i], gt[j]) < dist(al[i], gt[best_b])) {
        best_b = j;
        have_b = true;
      }
    }
    if (!have_b) continue;
    std::size_t best_a = 0;
    for (std::size_t k = 0; k < al.size(); ++k)
      if (dist(gt[best_b], al[k]) < dist(gt[best_b], al[best_a])) best_a = k;
    if (best_a != i) continue;
    if (dist(al[i], gt[best_b]) < tau) ++correct;
  }
  return correct;
}

std::vector<std::size_t> random_breakpoints(Rng& rng, std::size_t max_count,
                                            std::size_t T) {
  std::vector<std::size_t> out;
  const std::size_t n = rng.uniform_index(max_count + 1);
  while (out.size() < n) {
    const std::size_t b = 1 + rng.uniform_index(T - 1);
    if (std::find(out.begin(), out.end(), b) == out.end()) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("match_breakpoints worked examples") {
  SUBCASE("single pair within tolerance") {
    const MatchResult m =
        match_breakpoints(gt_of({10}), al_of({12}), MatchConfig{5});
    CHECK(m.counts.n_correct == 1);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{10, 12});
  }
  SUBCASE("toleration is strict") {
    const MatchResult m =
        match_breakpoints(gt_of({10}), al_of({12}), MatchConfig{2});
    CHECK(m.counts.n_correct == 0);
  }
  SUBCASE("equidistant tie goes to the smaller index") {
    // 15 is 5 away from both 10 and 20; the tie resolves to 10
    CHECK(match_breakpoints(gt_of({10, 20}), al_of({15}), MatchConfig{6})
              .counts.n_correct == 1);
    CHECK(match_breakpoints(gt_of({10, 20}), al_of({15}), MatchConfig{5})
              .counts.n_correct == 0);
  }
  SUBCASE("empty sides") {
    CHECK(match_breakpoints(gt_of({}), al_of({5}), MatchConfig{10})
              .counts.n_correct == 0);
    CHECK(match_breakpoints(gt_of({5}), al_of({}), MatchConfig{10})
              .counts.n_correct == 0);
  }
}

TEST_CASE("match_breakpoints equals the exhaustive matcher") {
  Rng rng(404);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t T = 20 + rng.uniform_index(480);
    const auto gt = random_breakpoints(rng, 20, T);
    const auto al = random_breakpoints(rng, 20, T);
    const std::size_t tau = rng.uniform_index(T / 2);
    const MatchResult m =
        match_breakpoints(gt_of(gt), al_of(al), MatchConfig{tau});
    CHECK(m.counts.n_correct == oracle_match(gt, al, tau));
    CHECK(m.counts.n_correct <= std::min(gt.size(), al.size()));
    // partial matching: no truth or alarm repeats
    std::vector<std::size_t> bs, as;
    for (const auto& [b, a] : m.pairs) {
      bs.push_back(b);
      as.push_back(a);
    }
    std::sort(bs.begin(), bs.end());
    std::sort(as.begin(), as.end());
    CHECK(std::adjacent_find(bs.begin(), bs.end()) == bs.end());
    CHECK(std::adjacent_find(as.begin(), as.end()) == as.end());
  }
}

TEST_CASE("N_CR is monotone in tau") {
  Rng rng(77);
  for (int iter = 0; iter < 100; ++iter) {
    const auto gt = random_breakpoints(rng, 10, 200);
    const auto al = random_breakpoints(rng, 10, 200);
    std::size_t prev = 0;
    for (std::size_t tau = 0; tau <= 50; tau += 5) {
      const std::size_t cr =
          match_breakpoints(gt_of(gt), al_of(al), MatchConfig{tau})
              .counts.n_correct;
      CHECK(cr >= prev);
      prev = cr;
    }
  }
}

TEST_CASE("tpr_fpr") {
  CHECK(tpr_fpr({3, 4, 6}) == std::pair<double, double>{0.75, 0.5});
  CHECK(tpr_fpr({5, 5, 5}) == std::pair<double, double>{1.0, 0.0});
  CHECK(tpr_fpr({0, 4, 0}) == std::pair<double, double>{0.0, 0.0});
  CHECK_THROWS_AS(tpr_fpr({0, 0, 3}), ConfigError);
}

TEST_CASE("roc_sweep endpoints and monotonicity") {
  const auto gt = gt_of({50, 100, 150});
  const auto al = al_of({52, 103, 160, 190});
  const std::vector<std::size_t> taus{0, 1, 2, 3, 5, 8, 11, 20, 500};
  const auto roc = roc_sweep(gt, al, taus);
  REQUIRE(roc.size() == taus.size());
  CHECK(roc.front().tpr == 0.0);  // strict inequality: tau = 0 never matches
  CHECK(roc.back().tpr == 1.0);   // every mutually-nearest pair matches
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].tpr >= roc[i - 1].tpr);
    CHECK(roc[i].fpr <= roc[i - 1].fpr);  // fewer false alarms as tau grows
  }
  CHECK_THROWS_AS(roc_sweep(gt, al, {}), ConfigError);
}

TEST_CASE("roc_sweep equals the per-tau exhaustive matcher") {
  Rng rng(606);
  for (int iter = 0; iter < 50; ++iter) {
    auto gt = random_breakpoints(rng, 10, 300);
    if (gt.empty()) gt.push_back(7);
    const auto al = random_breakpoints(rng, 10, 300);
    std::vector<std::size_t> taus;
    for (std::size_t t = 0; t <= 60; t += 4) taus.push_back(t);
    const auto roc = roc_sweep(gt_of(gt), al_of(al), taus);
    REQUIRE(roc.size() == taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const std::size_t cr = oracle_match(gt, al, taus[i]);
      CHECK(roc[i].tpr ==
            doctest::Approx(static_cast<double>(cr) /
                            static_cast<double>(gt.size())));
      if (!al.empty())
        CHECK(roc[i].fpr ==
              doctest::Approx(static_cast<double>(al.size() - cr) /
                              static_cast<double>(al.size())));
    }
  }
}

TEST_CASE("prediction_ratio") {
  CHECK(prediction_ratio({5, 5, 5}) == 1.0);
  CHECK(prediction_ratio({0, 5, 0}) == 0.0);
  CHECK(prediction_ratio({1, 2, 1000}) == 500.0);
  CHECK_THROWS_AS(prediction_ratio({0, 0, 1}), ConfigError);
}

TEST_CASE("mse_nearest") {
  CHECK(mse_nearest(gt_of({10, 20}), al_of({10, 20})) == 0.0);
  // distances measured in window units: gap 3 at stride 3 is one index
  CHECK(mse_nearest(gt_of({10}), al_of({13}), 3.0) == 1.0);
  CHECK(mse_nearest(gt_of({10}), al_of({})) ==
        std::numeric_limits<double>::infinity());
  CHECK(mse_nearest(gt_of({10, 30}), al_of({12})) ==
        doctest::Approx((4.0 + 324.0) / 2.0));
}

TEST_CASE("prediction_loss") {
  CHECK(prediction_loss(1.0, 123.0, {1, 1, 1}) == 0.0);
  CHECK(*prediction_loss(1.2, 10.0, {1, 5, 6}) == doctest::Approx(2.0));
  CHECK(!prediction_loss(0.0, std::numeric_limits<double>::infinity(), {0, 5, 0})
           .has_value());
  CHECK(!prediction_loss(500.0, 6.38, {1, 2, 1000}).has_value());
  // the over-prediction cap is configurable
  CHECK(prediction_loss(500.0, 6.38, {1, 2, 1000}, 1000.0).has_value());
}

TEST_CASE("evaluate_detection identities") {
  Rng rng(55);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t T = 50 + rng.uniform_index(200);
    auto gt = random_breakpoints(rng, 8, T);
    if (gt.empty()) gt.push_back(1 + rng.uniform_index(T - 1));
    const auto al = random_breakpoints(rng, 8, T);
    EvalConfig cfg;
    cfg.tau = 1 + rng.uniform_index(20);
    const EvalReport r = evaluate_detection(gt_of(gt), al_of(al), cfg);

    CHECK(r.tpr * static_cast<double>(r.counts.n_truth) ==
          doctest::Approx(static_cast<double>(r.counts.n_correct)).epsilon(1e-12));
    if (r.counts.n_alarms > 0)
      CHECK(r.fpr * static_cast<double>(r.counts.n_alarms) ==
            doctest::Approx(static_cast<double>(r.counts.n_alarms -
                                                r.counts.n_correct))
                .epsilon(1e-12));
    CHECK(r.pr == doctest::Approx(static_cast<double>(r.counts.n_alarms) /
                                  static_cast<double>(r.counts.n_truth)));
    if (al.empty()) {
      CHECK(std::isinf(r.mse));
      CHECK(!r.pl.has_value());
    } else {
      CHECK(*r.pl == doctest::Approx(std::abs(1.0 - r.pr) * r.mse));
      // PL = 0 iff PR = 1 or MSE = 0
      if (*r.pl == 0.0) CHECK((r.pr == 1.0 || r.mse == 0.0));
    }
  }
}
