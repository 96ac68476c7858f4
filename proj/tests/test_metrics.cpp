#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "notewatch/common.hpp"
#include "notewatch/metrics.hpp"
#include "notewatch/rng.hpp"

using namespace notewatch;
using metrics::Confusion;

namespace {

struct Scored {
  std::vector<double> s;
  std::vector<int> y;
};

// scores snapped to a coarse grid so ties occur
Scored random_tied(std::size_t n, double prevalence, std::uint64_t seed, int grid = 10) {
  Scored d;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    d.s.push_back(std::floor(rng.uniform01() * grid) / grid);
    d.y.push_back(rng.uniform01() < prevalence ? 1 : 0);
  }
  return d;
}

bool both_classes(const std::vector<int>& y) {
  bool p = false, q = false;
  for (int v : y) (v ? p : q) = true;
  return p && q;
}

// rank-statistic oracle: pairwise comparisons with half credit for ties
double mwu_auc(const Scored& d) {
  double u = 0.0;
  long pos = 0, neg = 0;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    if (d.y[i] != 1) continue;
    ++pos;
    for (std::size_t j = 0; j < d.y.size(); ++j) {
      if (d.y[j] == 1) continue;
      if (d.s[i] > d.s[j])
        u += 1.0;
      else if (d.s[i] == d.s[j])
        u += 0.5;
    }
  }
  for (int v : d.y) neg += v == 0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

// naive confusion by direct loop
Confusion naive_confusion(const Scored& d, double t) {
  Confusion c;
  for (std::size_t i = 0; i < d.s.size(); ++i) {
    const bool hit = d.s[i] >= t;
    if (d.y[i] == 1)
      (hit ? c.tp : c.fn)++;
    else
      (hit ? c.fp : c.tn)++;
  }
  return c;
}

// step-wise average precision recomputed from naive per-threshold confusions
double naive_ap(const Scored& d) {
  std::set<double, std::greater<double>> thresholds(d.s.begin(), d.s.end());
  long pos = 0;
  for (int v : d.y) pos += v;
  double ap = 0.0, r_prev = 0.0;
  for (double t : thresholds) {
    const Confusion c = naive_confusion(d, t);
    const double r = static_cast<double>(c.tp) / static_cast<double>(pos);
    const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    ap += (r - r_prev) * p;
    r_prev = r;
  }
  return ap;
}

double naive_f2(const Confusion& c) {
  if (c.tp == 0) return 0.0;
  const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return 5.0 * p * r / (4.0 * p + r);
}

}  // namespace

TEST_CASE("confusion counts follow the score >= threshold rule") {
  SUBCASE("two points split cleanly at 0.5") {
    const Confusion c = metrics::confusion_at({0.9, 0.1}, {1, 0}, 0.5);
    CHECK(c.tp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
  }
  SUBCASE("threshold zero predicts everything positive") {
    const auto d = random_tied(200, 0.3, 21);
    const Confusion c = metrics::confusion_at(d.s, d.y, 0.0);
    long neg = 0, pos = 0;
    for (int v : d.y) (v ? pos : neg)++;
    CHECK(c.fp == neg);
    CHECK(c.tp == pos);
    CHECK(c.fn == 0);
    CHECK(c.tn == 0);
  }
  SUBCASE("random instance matches the naive loop") {
    const auto d = random_tied(100, 0.25, 22);
    for (double t : {0.0, 0.15, 0.5, 0.85, 1.0}) {
      const Confusion a = metrics::confusion_at(d.s, d.y, t);
      const Confusion b = naive_confusion(d, t);
      CHECK(a.tp == b.tp);
      CHECK(a.fp == b.fp);
      CHECK(a.fn == b.fn);
      CHECK(a.tn == b.tn);
      CHECK(a.tp + a.fp + a.fn + a.tn == 100);
    }
  }
  SUBCASE("malformed input is fatal") {
    CHECK_THROWS_AS((void)metrics::confusion_at({0.5}, {1, 0}, 0.5), validation_error);
    CHECK_THROWS_AS((void)metrics::confusion_at({}, {}, 0.5), validation_error);
    CHECK_THROWS_AS((void)metrics::confusion_at({1.5}, {1}, 0.5), validation_error);
    CHECK_THROWS_AS((void)metrics::confusion_at({0.5}, {2}, 0.5), validation_error);
  }
}

TEST_CASE("roc auc equals the tie-aware rank statistic") {
  SUBCASE("perfect separation scores 1") {
    CHECK(metrics::roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  }
  SUBCASE("uninformative scores sit near one half") {
    Rng rng(31);
    Scored d;
    for (int i = 0; i < 10000; ++i) {
      d.s.push_back(rng.uniform01());
      d.y.push_back(rng.uniform01() < 0.5 ? 1 : 0);
    }
    const double auc = metrics::roc_auc(d.s, d.y);
    CHECK(std::abs(auc - 0.5) < 0.02);
  }
  SUBCASE("fifty tied instances agree with the pairwise oracle") {
    int used = 0;
    for (int trial = 0; used < 50; ++trial) {
      const auto d = random_tied(30, 0.4, 4000 + trial, 6);
      if (!both_classes(d.y)) continue;
      ++used;
      CHECK(metrics::roc_auc(d.s, d.y) == doctest::Approx(mwu_auc(d)).epsilon(1e-9));
    }
  }
  SUBCASE("single-class input has no roc") {
    CHECK_THROWS_AS((void)metrics::roc_auc({0.5, 0.6}, {1, 1}), metrics::undefined_metric);
    CHECK_THROWS_AS((void)metrics::roc_auc({0.5, 0.6}, {0, 0}), metrics::undefined_metric);
  }
}

TEST_CASE("roc curve is monotone from origin to corner") {
  const auto d = random_tied(300, 0.3, 41);
  const auto curve = metrics::roc_curve(d.s, d.y);
  REQUIRE(curve.points.size() >= 2);
  CHECK(curve.points.front().x == 0.0);
  CHECK(curve.points.front().y == 0.0);
  CHECK(std::isinf(curve.points.front().threshold));
  CHECK(curve.points.back().x == 1.0);
  CHECK(curve.points.back().y == 1.0);
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    CHECK(curve.points[k].x >= curve.points[k - 1].x);
    CHECK(curve.points[k].y >= curve.points[k - 1].y);
    CHECK(curve.points[k].threshold < curve.points[k - 1].threshold);
  }
}

TEST_CASE("pr auc is step-wise average precision") {
  SUBCASE("perfect classifier scores 1") {
    CHECK(metrics::pr_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  }
  SUBCASE("uninformative scores approach prevalence") {
    Rng rng(51);
    Scored d;
    for (int i = 0; i < 10000; ++i) {
      d.s.push_back(rng.uniform01());
      d.y.push_back(rng.uniform01() < 0.10 ? 1 : 0);
    }
    CHECK(std::abs(metrics::pr_auc(d.s, d.y) - 0.10) < 0.02);
  }
  SUBCASE("fifty instances agree with the per-threshold recomputation") {
    int used = 0;
    for (int trial = 0; used < 50; ++trial) {
      const auto d = random_tied(40, 0.3, 6000 + trial, 8);
      long pos = 0;
      for (int v : d.y) pos += v;
      if (pos == 0) continue;
      ++used;
      CHECK(metrics::pr_auc(d.s, d.y) == doctest::Approx(naive_ap(d)).epsilon(1e-9));
    }
  }
  SUBCASE("recall never decreases along the curve and matches tpr") {
    const auto d = random_tied(200, 0.35, 61);
    const auto pr = metrics::pr_curve(d.s, d.y);
    const auto roc = metrics::roc_curve(d.s, d.y);
    REQUIRE(pr.points.size() == roc.points.size());
    for (std::size_t k = 1; k < pr.points.size(); ++k) {
      CHECK(pr.points[k].x >= pr.points[k - 1].x);
      CHECK(pr.points[k].threshold == roc.points[k].threshold);
      CHECK(pr.points[k].x == roc.points[k].y);  // recall is the tpr
    }
    CHECK(pr.points.front().y == 1.0);  // anchor precision
  }
  SUBCASE("no positives means no pr curve") {
    CHECK_THROWS_AS((void)metrics::pr_auc({0.5, 0.6}, {0, 0}), metrics::undefined_metric);
  }
}

TEST_CASE("aucs are invariant under strictly monotone score transforms") {
  const auto d = random_tied(150, 0.3, 71);
  std::vector<double> squared;
  for (double s : d.s) squared.push_back(s * s);
  CHECK(metrics::roc_auc(d.s, d.y) == metrics::roc_auc(squared, d.y));
  CHECK(metrics::pr_auc(d.s, d.y) == metrics::pr_auc(squared, d.y));
}

TEST_CASE("flipping scores and labels mirrors the roc auc") {
  Rng rng(81);
  Scored d;
  for (int i = 0; i < 400; ++i) {
    d.s.push_back(rng.uniform01_open());  // continuous, ties have measure zero
    d.y.push_back(rng.uniform01() < 0.4 ? 1 : 0);
  }
  std::vector<double> flipped_s;
  std::vector<int> flipped_y;
  for (std::size_t i = 0; i < d.s.size(); ++i) {
    flipped_s.push_back(1.0 - d.s[i]);
    flipped_y.push_back(1 - d.y[i]);
  }
  const double base = metrics::roc_auc(d.s, d.y);
  // reversing the score order mirrors the ranking; relabeling does the same
  CHECK(base + metrics::roc_auc(flipped_s, d.y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(base + metrics::roc_auc(d.s, flipped_y) == doctest::Approx(1.0).epsilon(1e-12));
  // flipping both cancels out
  CHECK(metrics::roc_auc(flipped_s, flipped_y) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("baseline pr auc is the positive fraction") {
  std::vector<int> y(4280, 0);
  for (int i = 0; i < 425; ++i) y[i] = 1;
  const double base = metrics::baseline_pr_auc(y);
  CHECK(base == 425.0 / 4280.0);
  CHECK(base == doctest::Approx(0.0993).epsilon(1e-3));
  CHECK(metrics::baseline_pr_auc({1, 1, 1}) == 1.0);
  CHECK(metrics::baseline_pr_auc({0, 0, 0}) == 0.0);
  CHECK_THROWS_AS((void)metrics::baseline_pr_auc({}), validation_error);
}

TEST_CASE("f beta reduces to known arithmetic") {
  SUBCASE("equal precision and recall is a fixed point for any beta") {
    const Confusion c{3, 2, 2, 10};  // p = r = 0.6
    for (double beta : {0.5, 1.0, 2.0, 3.0})
      CHECK(metrics::f_beta(c, beta) == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("always-positive classifier at the reference prevalence") {
    const Confusion c{425, 3855, 0, 0};  // p = prevalence, r = 1
    const double p = 425.0 / 4280.0;
    const double expect = 5.0 * p / (4.0 * p + 1.0);
    CHECK(metrics::f_beta(c, 2.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(metrics::f_beta(c, 2.0) == doctest::Approx(0.3554).epsilon(1e-3));
  }
  SUBCASE("worked example") {
    const Confusion c{3, 2, 7, 5};  // p = 0.6, r = 0.3
    CHECK(metrics::f_beta(c, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("no true positives scores zero") {
    CHECK(metrics::f_beta({0, 5, 5, 5}, 2.0) == 0.0);
    CHECK(metrics::f_beta({0, 0, 0, 10}, 2.0) == 0.0);
  }
  SUBCASE("beta must be positive") {
    CHECK_THROWS_AS((void)metrics::f_beta({1, 1, 1, 1}, 0.0), validation_error);
    CHECK_THROWS_AS((void)metrics::f_beta({1, -1, 1, 1}, 2.0), validation_error);
  }
}

TEST_CASE("f2 threshold search") {
  SUBCASE("perfect classifier peaks at the lowest positive score") {
    const auto r = metrics::f2_max({0.9, 0.7, 0.3, 0.1}, {1, 1, 0, 0});
    CHECK(r.value == 1.0);
    CHECK(r.threshold == 0.7);
  }
  SUBCASE("uninformative scores make always-positive optimal at threshold 0") {
    std::vector<double> s(4280, 0.5);
    std::vector<int> y(4280, 0);
    for (int i = 0; i < 425; ++i) y[i] = 1;
    const auto r = metrics::f2_max(s, y);
    const double p = 425.0 / 4280.0;
    CHECK(r.value == doctest::Approx(5.0 * p / (4.0 * p + 1.0)).epsilon(1e-12));
    CHECK(r.threshold == 0.0);  // smallest threshold wins the tie
  }
  SUBCASE("random instances match the exhaustive sweep") {
    int used = 0;
    for (int trial = 0; used < 30; ++trial) {
      const auto d = random_tied(40, 0.3, 8000 + trial, 8);
      if (!both_classes(d.y)) continue;
      ++used;
      std::set<double> grid(d.s.begin(), d.s.end());
      grid.insert(0.0);
      grid.insert(1.0);
      double best_v = -1.0, best_t = 0.0;
      for (double t : grid) {  // ascending; strict improvement keeps smallest
        const double v = naive_f2(naive_confusion(d, t));
        if (v > best_v) {
          best_v = v;
          best_t = t;
        }
      }
      const auto r = metrics::f2_max(d.s, d.y);
      CHECK(r.value == doctest::Approx(best_v).epsilon(1e-12));
      CHECK(r.threshold == best_t);
      CHECK(r.value >= naive_f2(naive_confusion(d, 0.0)));  // beats always-positive
    }
  }
  SUBCASE("single-class input is rejected") {
    CHECK_THROWS_AS((void)metrics::f2_max({0.5, 0.6}, {1, 1}), metrics::undefined_metric);
  }
}

TEST_CASE("cohens kappa") {
  SUBCASE("identical labelings agree perfectly") {
    CHECK(metrics::cohens_kappa({1, 0, 1, 0, 1}, {1, 0, 1, 0, 1}) == 1.0);
  }
  SUBCASE("hand-worked chance-level example") {
    CHECK(metrics::cohens_kappa({1, 1, 0, 0}, {1, 0, 1, 0}) == 0.0);
  }
  SUBCASE("independent labelings hover near zero") {
    Rng rng(91);
    std::vector<int> a, b;
    for (int i = 0; i < 10000; ++i) {
      a.push_back(rng.uniform01() < 0.5 ? 1 : 0);
      b.push_back(rng.uniform01() < 0.5 ? 1 : 0);
    }
    CHECK(std::abs(metrics::cohens_kappa(a, b)) < 0.05);
  }
  SUBCASE("kappa is symmetric") {
    Rng rng(92);
    std::vector<int> a, b;
    for (int i = 0; i < 500; ++i) {
      a.push_back(rng.uniform01() < 0.3 ? 1 : 0);
      b.push_back(rng.uniform01() < 0.6 ? 1 : 0);
    }
    CHECK(metrics::cohens_kappa(a, b) == metrics::cohens_kappa(b, a));
  }
  SUBCASE("constant raters") {
    CHECK(metrics::cohens_kappa({1, 1, 1}, {1, 1, 1}) == 1.0);  // equal constants
    CHECK(metrics::cohens_kappa({0, 0, 0}, {0, 0, 0}) == 1.0);
    CHECK(metrics::cohens_kappa({1, 1, 1}, {0, 0, 0}) == 0.0);  // opposite constants
  }
  SUBCASE("malformed input is fatal") {
    CHECK_THROWS_AS((void)metrics::cohens_kappa({}, {}), validation_error);
    CHECK_THROWS_AS((void)metrics::cohens_kappa({1}, {1, 0}), validation_error);
    CHECK_THROWS_AS((void)metrics::cohens_kappa({2}, {1}), validation_error);
  }
}

TEST_CASE("kappa sweep applies equidistant thresholds to both scorers") {
  SUBCASE("identical scores agree at every threshold") {
    const auto d = random_tied(100, 0.4, 101);
    const auto sweep = metrics::kappa_sweep(d.s, d.s);
    REQUIRE(sweep.size() == 200);
    CHECK(sweep.front().threshold == 0.0);
    CHECK(sweep.back().threshold == 1.0);
    for (const auto& pt : sweep) {
      CHECK(pt.defined);
      CHECK(pt.kappa == 1.0);
    }
    // equidistant spacing
    for (std::size_t k = 1; k < sweep.size(); ++k)
      CHECK(sweep[k].threshold - sweep[k - 1].threshold ==
            doctest::Approx(1.0 / 199.0).epsilon(1e-12));
  }
  SUBCASE("threshold zero marks both raters all-positive") {
    const auto a = random_tied(50, 0.4, 102);
    const auto b = random_tied(50, 0.4, 103);
    const auto sweep = metrics::kappa_sweep(a.s, b.s);
    CHECK(sweep.front().threshold == 0.0);
    CHECK(sweep.front().defined);
    CHECK(sweep.front().kappa == 1.0);  // constant and equal raters
  }
  SUBCASE("sweep points match direct kappa of thresholded labels") {
    const auto a = random_tied(80, 0.5, 104);
    const auto b = random_tied(80, 0.5, 105);
    const auto sweep = metrics::kappa_sweep(a.s, b.s, 11);
    REQUIRE(sweep.size() == 11);
    for (const auto& pt : sweep) {
      std::vector<int> la, lb;
      for (std::size_t i = 0; i < a.s.size(); ++i) {
        la.push_back(a.s[i] >= pt.threshold ? 1 : 0);
        lb.push_back(b.s[i] >= pt.threshold ? 1 : 0);
      }
      CHECK(pt.kappa == metrics::cohens_kappa(la, lb));
    }
  }
  SUBCASE("degenerate arguments are fatal") {
    CHECK_THROWS_AS((void)metrics::kappa_sweep({0.5}, {0.5, 0.5}), validation_error);
    CHECK_THROWS_AS((void)metrics::kappa_sweep({}, {}), validation_error);
    CHECK_THROWS_AS((void)metrics::kappa_sweep({0.5}, {0.5}, 1), validation_error);
    CHECK_THROWS_AS((void)metrics::kappa_sweep({1.5}, {0.5}), validation_error);
  }
}

TEST_CASE("fold summaries use the sample standard deviation") {
  const auto s = metrics::summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
  CHECK(s.per_fold.size() == 4);

  const auto single = metrics::summarize({0.7});
  CHECK(single.mean == 0.7);
  CHECK(single.stddev == 0.0);

  CHECK_THROWS_AS((void)metrics::summarize({}), validation_error);
}
