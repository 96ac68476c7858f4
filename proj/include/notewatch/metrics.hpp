#pragma once

#include <string>
#include <vector>

#include "notewatch/common.hpp"

namespace notewatch::metrics {

// The requested metric has no value on this data (e.g. a single-class fold).
class undefined_metric : public validation_error {
 public:
  explicit undefined_metric(const std::string& msg) : validation_error(msg) {}
};

struct Confusion {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

// ROC points carry (x, y) = (false positive rate, true positive rate); PR
// points carry (recall, precision). The anchor point at zero predicted
// positives has an infinite threshold.
struct CurvePoint {
  double threshold = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct Curve {
  std::vector<CurvePoint> points;
};

// A prediction is positive when score >= threshold.
Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold);

Curve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// Trapezoidal area under the ROC curve over distinct-score thresholds;
// equals the rank statistic with ties counted half.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

Curve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-wise average precision: sum over descending thresholds of
// (recall_n - recall_{n-1}) * precision_n.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Positive fraction; the expected precision of a random ranker.
double baseline_pr_auc(const std::vector<int>& labels);

// (1 + beta^2) P R / (beta^2 P + R), defined 0 when there are no true
// positives.
double f_beta(const Confusion& c, double beta);

struct F2Max {
  double threshold = 0.0;
  double value = 0.0;
};

// Sweeps every distinct score plus 0 and 1 as thresholds; ties resolve to
// the smallest threshold.
F2Max f2_max(const std::vector<double>& scores, const std::vector<int>& labels);

// Agreement beyond chance between two binary labelings. Two constant and
// equal raters have chance agreement 1; kappa is defined 1 there.
double cohens_kappa(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct KappaPoint {
  double threshold = 0.0;
  double kappa = 0.0;
  bool defined = true;  // false only if the chance denominator vanishes
};

// Applies n_thresholds equidistant thresholds covering [0, 1] to both score
// vectors and reports kappa at each.
std::vector<KappaPoint> kappa_sweep(const std::vector<double>& scores_a,
                                    const std::vector<double>& scores_b,
                                    int n_thresholds = 200);

struct MetricStat {
  std::vector<double> per_fold;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single fold
};

MetricStat summarize(const std::vector<double>& per_fold);

// One evaluated configuration: fold-level threshold-agnostic metrics plus
// the per-fold maximizing thresholds for F2.
struct MetricSummary {
  MetricStat pr_auc;
  MetricStat roc_auc;
  MetricStat f2_max;
  std::vector<double> f2_thresholds;
};

}  // namespace notewatch::metrics
