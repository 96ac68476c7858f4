#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "notewatch/classifiers.hpp"
#include "notewatch/corpus.hpp"
#include "notewatch/embeddings.hpp"
#include "notewatch/features.hpp"
#include "notewatch/metrics.hpp"
#include "notewatch/textnorm.hpp"
#include "notewatch/topics.hpp"

namespace notewatch::harness {

enum class Representation { lda, embeddings, both };
enum class ClassifierKind { svm, forest };
enum class SelectionMetric { pr_auc, roc_auc };

// Hyperparameter grids searched by the inner loop, in canonical enumeration
// order (ties in the search resolve to the earliest cell).
std::vector<forest::RandomForestConfig> default_forest_grid(int n_estimators = 500);
std::vector<svm::SvmConfig> default_svm_grid();

struct PipelineConfig {
  Representation representation = Representation::embeddings;
  bool use_structured = true;
  ClassifierKind classifier = ClassifierKind::forest;
  std::vector<forest::RandomForestConfig> forest_grid = default_forest_grid();
  std::vector<svm::SvmConfig> svm_grid = default_svm_grid();
  SelectionMetric selection = SelectionMetric::pr_auc;
  std::uint64_t seed = 0;
  int k_outer = 5;
  int k_inner = 5;
  // Retrain topic and embedding models on each outer-train split instead of
  // once on the full note corpus. Slower; closes the shared-representation
  // leakage surface for comparison runs.
  bool representation_per_fold = false;
  long vocab_min_count = 20;     // topic-model vocabulary thresholds
  std::size_t min_doc_len = 10;  // shared by vocabulary and embedding training
  topics::LdaConfig lda;
  embeddings::ParagraphVectorConfig pv;
};

// Patient-level fold assignments. Every admission period of a patient lands
// in that patient's fold, so no patient straddles a train/test boundary.
struct FoldPlan {
  int k = 0;
  std::unordered_map<std::string, int> outer;  // patient_id -> fold
  int k_inner = 0;
  // inner[f]: patient_id -> inner fold, over the patients outside outer fold f
  std::vector<std::unordered_map<std::string, int>> inner;

  bool operator==(const FoldPlan&) const = default;
};

// Distinct patients are sorted, shuffled with the seeded generator, and
// dealt round-robin into k folds. Fatal when there are fewer patients
// than folds. Only the outer level is filled in.
FoldPlan make_folds(const std::vector<std::string>& patient_ids, int k = 5,
                    std::uint64_t seed = 0);
FoldPlan make_folds(const std::vector<corpus::PeriodRecord>& records, int k = 5,
                    std::uint64_t seed = 0);

// Topic and embedding models fit on one training corpus.
struct RepresentationModels {
  std::optional<topics::TopicModel> lda;
  std::optional<embeddings::ParagraphVectorModel> pv;
};

RepresentationModels train_representation(const std::vector<textnorm::TokenDoc>& docs,
                                          const PipelineConfig& cfg);

// One row per record: topic weights and/or embedding dimensions, then the
// structured columns when enabled. Topic weights are re-inferred for every
// row; embedding rows use the trained document vector when the document was
// in the training corpus and fresh inference otherwise. Labels are never
// consulted. Docs are matched to records by period_id; extras are ignored.
features::FeatureMatrix build_features(const RepresentationModels& models,
                                       const std::vector<corpus::PeriodRecord>& records,
                                       const std::vector<textnorm::TokenDoc>& docs,
                                       const PipelineConfig& cfg,
                                       std::vector<std::string>* warnings = nullptr);

struct FoldResult {
  int fold = 0;
  std::vector<std::string> period_ids;  // outer-test rows, dataset order
  std::vector<int> labels;
  std::vector<double> scores;
  int chosen_cell = -1;     // index into the active grid
  double inner_mean = 0.0;  // mean inner selection metric of the winner
  double pr_auc = 0.0;
  double roc_auc = 0.0;
  metrics::F2Max f2;
  classifiers::ImportanceReport importances;  // forest runs only
};

struct NestedCvResult {
  PipelineConfig config;
  FoldPlan plan;
  std::vector<FoldResult> folds;
  metrics::MetricSummary summary;
  std::vector<std::string> warnings;
};

// Nested cross-validation grouped by patient: the inner loop grid-searches
// each outer-train split (single-class inner folds are skipped with a
// warning; all skipped is fatal), the winner is refit on the full
// outer-train split and scored on outer-test. Representation models never
// see labels; classifier fits see only their training rows. Docs must cover
// every record's period_id.
NestedCvResult nested_cv(const std::vector<corpus::PeriodRecord>& records,
                         const std::vector<textnorm::TokenDoc>& docs,
                         const PipelineConfig& config, int jobs = 1);

// Human-readable hyperparameters of one grid cell of the active classifier.
std::string describe_cell(const PipelineConfig& config, int cell);

struct KappaReport {
  double threshold_a = 0.0;  // pooled F2-max threshold per run
  double threshold_b = 0.0;
  metrics::MetricStat kappa;               // per outer fold, labels at the thresholds
  std::vector<metrics::KappaPoint> sweep;  // pooled scores, equidistant thresholds
};

// Agreement between two runs over the same fold plan and rows. Fatal when
// the plans or the per-fold row sets differ.
KappaReport compare_classifiers(const NestedCvResult& a, const NestedCvResult& b);

struct ImportanceAudit {
  // per outer fold: the refit winner's ten heaviest features
  std::vector<std::vector<std::pair<std::string, double>>> top_per_fold;
  std::vector<std::pair<std::string, int>> by_repetition;   // folds seen in a top list
  std::vector<std::pair<std::string, double>> by_total;     // summed importance, top ten
};

// Forest runs only; an svm run is fatal.
ImportanceAudit importance_audit(const NestedCvResult& run);

}  // namespace notewatch::harness
