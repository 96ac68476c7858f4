#include "notewatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace notewatch::metrics {

namespace {

void validate_pair(const std::vector<double>& scores, const std::vector<int>& labels,
                   bool unit_interval) {
  if (scores.size() != labels.size())
    throw validation_error("scores and labels differ in length");
  if (scores.empty()) throw validation_error("empty score vector");
  for (double s : scores) {
    if (!std::isfinite(s)) throw validation_error("scores must be finite");
    if (unit_interval && (s < 0.0 || s > 1.0))
      throw validation_error("scores must lie in [0, 1]");
  }
  for (int y : labels)
    if (y != 0 && y != 1) throw validation_error("labels must be 0 or 1");
}

long count_positives(const std::vector<int>& labels) {
  long p = 0;
  for (int y : labels) p += y;
  return p;
}

// (threshold, cumulative tp, cumulative fp) per distinct score, descending
struct SweepStep {
  double threshold;
  long tp;
  long fp;
};

std::vector<SweepStep> descending_sweep(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<SweepStep> steps;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp)++;
      ++i;
    }
    steps.push_back({s, tp, fp});
  }
  return steps;
}

}  // namespace

Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
  validate_pair(scores, labels, true);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1)
      (predicted ? c.tp : c.fn)++;
    else
      (predicted ? c.fp : c.tn)++;
  }
  return c;
}

Curve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  validate_pair(scores, labels, false);
  const long pos = count_positives(labels);
  const long neg = static_cast<long>(labels.size()) - pos;
  if (pos == 0 || neg == 0)
    throw undefined_metric("roc curve needs both classes");
  Curve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const auto& s : descending_sweep(scores, labels))
    curve.points.push_back({s.threshold, static_cast<double>(s.fp) / static_cast<double>(neg),
                            static_cast<double>(s.tp) / static_cast<double>(pos)});
  return curve;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const Curve curve = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.x - a.x) * (a.y + b.y) / 2.0;
  }
  return area;
}

Curve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  validate_pair(scores, labels, false);
  const long pos = count_positives(labels);
  if (pos == 0) throw undefined_metric("pr curve needs at least one positive");
  Curve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  for (const auto& s : descending_sweep(scores, labels))
    curve.points.push_back({s.threshold, static_cast<double>(s.tp) / static_cast<double>(pos),
                            static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp)});
  return curve;
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const Curve curve = pr_curve(scores, labels);
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k)
    area += (curve.points[k].x - curve.points[k - 1].x) * curve.points[k].y;
  return area;
}

double baseline_pr_auc(const std::vector<int>& labels) {
  if (labels.empty()) throw validation_error("empty label vector");
  for (int y : labels)
    if (y != 0 && y != 1) throw validation_error("labels must be 0 or 1");
  return static_cast<double>(count_positives(labels)) / static_cast<double>(labels.size());
}

double f_beta(const Confusion& c, double beta) {
  if (!(beta > 0.0)) throw validation_error("beta must be positive");
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
    throw validation_error("confusion counts must be non-negative");
  if (c.tp == 0) return 0.0;
  const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

F2Max f2_max(const std::vector<double>& scores, const std::vector<int>& labels) {
  validate_pair(scores, labels, true);
  const long pos = count_positives(labels);
  const long neg = static_cast<long>(labels.size()) - pos;
  if (pos == 0 || neg == 0)
    throw undefined_metric("f2 threshold search needs both classes");

  // candidate thresholds ascending: 0, every distinct score, 1
  auto steps = descending_sweep(scores, labels);
  std::vector<std::pair<double, Confusion>> candidates;
  candidates.push_back({0.0, {pos, neg, 0, 0}});  // everything predicted positive
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->threshold == 0.0 || it->threshold == 1.0) continue;  // endpoint handled
    candidates.push_back(
        {it->threshold, {it->tp, it->fp, pos - it->tp, neg - it->fp}});
  }
  Confusion at_one;  // score >= 1 predicted positive
  if (!steps.empty() && steps.front().threshold == 1.0)
    at_one = {steps.front().tp, steps.front().fp, pos - steps.front().tp,
              neg - steps.front().fp};
  else
    at_one = {0, 0, pos, neg};
  candidates.push_back({1.0, at_one});

  F2Max best{candidates.front().first, f_beta(candidates.front().second, 2.0)};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double value = f_beta(candidates[i].second, 2.0);
    if (value > best.value) best = {candidates[i].first, value};
  }
  return best;
}

double cohens_kappa(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw validation_error("labelings differ in length");
  if (labels_a.empty()) throw validation_error("empty labelings");
  long a1 = 0, b1 = 0, agree = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if ((labels_a[i] != 0 && labels_a[i] != 1) || (labels_b[i] != 0 && labels_b[i] != 1))
      throw validation_error("labels must be 0 or 1");
    a1 += labels_a[i];
    b1 += labels_b[i];
    agree += labels_a[i] == labels_b[i];
  }
  const auto n = static_cast<double>(labels_a.size());
  const long n_l = static_cast<long>(labels_a.size());
  // both raters constant and equal: chance agreement is total
  if ((a1 == 0 && b1 == 0) || (a1 == n_l && b1 == n_l)) return 1.0;
  const double pa = a1 / n, pb = b1 / n;
  const double po = agree / n;
  const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  return (po - pe) / (1.0 - pe);
}

std::vector<KappaPoint> kappa_sweep(const std::vector<double>& scores_a,
                                    const std::vector<double>& scores_b,
                                    int n_thresholds) {
  if (scores_a.size() != scores_b.size())
    throw validation_error("score vectors differ in length");
  if (scores_a.empty()) throw validation_error("empty score vectors");
  if (n_thresholds < 2) throw validation_error("n_thresholds must be at least 2");
  for (double s : scores_a)
    if (!std::isfinite(s) || s < 0.0 || s > 1.0)
      throw validation_error("scores must lie in [0, 1]");
  for (double s : scores_b)
    if (!std::isfinite(s) || s < 0.0 || s > 1.0)
      throw validation_error("scores must lie in [0, 1]");

  std::vector<KappaPoint> out;
  out.reserve(static_cast<std::size_t>(n_thresholds));
  std::vector<int> la(scores_a.size()), lb(scores_b.size());
  for (int k = 0; k < n_thresholds; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_thresholds - 1);
    for (std::size_t i = 0; i < scores_a.size(); ++i) {
      la[i] = scores_a[i] >= t ? 1 : 0;
      lb[i] = scores_b[i] >= t ? 1 : 0;
    }
    out.push_back({t, cohens_kappa(la, lb), true});
  }
  return out;
}

MetricStat summarize(const std::vector<double>& per_fold) {
  if (per_fold.empty()) throw validation_error("no fold values to summarize");
  MetricStat s;
  s.per_fold = per_fold;
  s.mean = std::accumulate(per_fold.begin(), per_fold.end(), 0.0) /
           static_cast<double>(per_fold.size());
  if (per_fold.size() > 1) {
    double sq = 0.0;
    for (double v : per_fold) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(per_fold.size() - 1));
  }
  return s;
}

}  // namespace notewatch::metrics
