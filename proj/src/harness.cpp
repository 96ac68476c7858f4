#include "notewatch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "notewatch/common.hpp"
#include "notewatch/parallel.hpp"
#include "notewatch/rng.hpp"
#include "notewatch/vocab.hpp"

namespace notewatch::harness {

namespace {

constexpr const char* kStructuredNames[] = {
    "age_admission",    "gender_male",         "num_words",
    "note_span_days",   "n_meds_prescribed",   "n_meds_administered",
    "has_diagnosis",    "admission_start_hour"};

bool uses_lda(Representation r) {
  return r == Representation::lda || r == Representation::both;
}
bool uses_pv(Representation r) {
  return r == Representation::embeddings || r == Representation::both;
}

bool has_both_classes(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) (v ? pos : neg) = true;
  return pos && neg;
}

// first-seen order, repeats collapsed to one line with a count
std::vector<std::string> dedupe_warnings(const std::vector<std::string>& raw) {
  std::vector<std::string> order;
  std::unordered_map<std::string, long> counts;
  for (const auto& w : raw) {
    if (counts[w]++ == 0) order.push_back(w);
  }
  std::vector<std::string> out;
  for (const auto& w : order) {
    const long n = counts[w];
    out.push_back(n == 1 ? w : w + " (x" + std::to_string(n) + ")");
  }
  return out;
}

std::unordered_map<std::string, const textnorm::TokenDoc*> doc_lookup(
    const std::vector<textnorm::TokenDoc>& docs) {
  std::unordered_map<std::string, const textnorm::TokenDoc*> map;
  for (const auto& d : docs)
    if (!map.emplace(d.doc_id, &d).second)
      throw validation_error("duplicate token doc id: " + d.doc_id);
  return map;
}

}  // namespace

std::vector<forest::RandomForestConfig> default_forest_grid(int n_estimators) {
  std::vector<forest::RandomForestConfig> grid;
  for (const int msl : {3, 5, 10})
    for (const int mf : {5, 8, 0})  // 0 resolves to floor(sqrt(columns))
      for (const auto crit : {forest::Criterion::gini, forest::Criterion::entropy}) {
        forest::RandomForestConfig c;
        c.n_estimators = n_estimators;
        c.min_samples_leaf = msl;
        c.max_features = mf;
        c.criterion = crit;
        grid.push_back(c);
      }
  return grid;
}

std::vector<svm::SvmConfig> default_svm_grid() {
  std::vector<svm::SvmConfig> grid;
  for (const double c : {0.1, 1.0, 10.0})
    for (int e = -5; e <= 0; ++e) {
      svm::SvmConfig s;
      s.C = c;
      s.gamma = std::pow(10.0, e);
      grid.push_back(s);
    }
  return grid;
}

FoldPlan make_folds(const std::vector<std::string>& patient_ids, int k,
                    std::uint64_t seed) {
  if (k < 2) throw validation_error("fold count must be at least 2");
  std::vector<std::string> distinct(patient_ids);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < static_cast<std::size_t>(k))
    throw validation_error("fewer distinct patients than folds");
  Rng rng(seed);
  rng.shuffle(distinct);
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < distinct.size(); ++i)
    plan.outer[distinct[i]] = static_cast<int>(i % k);
  return plan;
}

FoldPlan make_folds(const std::vector<corpus::PeriodRecord>& records, int k,
                    std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.patient_id);
  return make_folds(ids, k, seed);
}

RepresentationModels train_representation(const std::vector<textnorm::TokenDoc>& docs,
                                          const PipelineConfig& cfg) {
  RepresentationModels models;
  if (uses_lda(cfg.representation)) {
    const auto vocab = vocab::build_vocab(docs, cfg.vocab_min_count, cfg.min_doc_len);
    const auto bows = vocab::training_bow(docs, vocab, cfg.min_doc_len);
    models.lda = topics::train_lda(bows, vocab, cfg.lda);
  }
  if (uses_pv(cfg.representation))
    models.pv = embeddings::train_pv(docs, cfg.pv, cfg.min_doc_len);
  return models;
}

features::FeatureMatrix build_features(const RepresentationModels& models,
                                       const std::vector<corpus::PeriodRecord>& records,
                                       const std::vector<textnorm::TokenDoc>& docs,
                                       const PipelineConfig& cfg,
                                       std::vector<std::string>* warnings) {
  if (records.empty()) throw validation_error("no records to featurize");
  if (uses_lda(cfg.representation) && !models.lda)
    throw validation_error("configuration uses topics but no topic model was trained");
  if (uses_pv(cfg.representation) && !models.pv)
    throw validation_error("configuration uses embeddings but no embedding model was trained");

  const auto lookup = doc_lookup(docs);
  for (const auto& r : records)
    if (!lookup.count(r.period_id))
      throw validation_error("no token doc for period " + r.period_id);

  features::FeatureMatrix x;
  if (models.lda)
    for (int k = 0; k < models.lda->K; ++k) x.names.push_back("topic_" + std::to_string(k));
  if (models.pv)
    for (int d = 0; d < models.pv->config.vector_size; ++d)
      x.names.push_back("emb_" + std::to_string(d));
  if (cfg.use_structured)
    for (const char* n : kStructuredNames) x.names.push_back(n);

  x.rows = records.size();
  x.values.reserve(x.rows * x.cols());
  long lda_fallbacks = 0, pv_fallbacks = 0;
  for (const auto& r : records) {
    const textnorm::TokenDoc& doc = *lookup.at(r.period_id);
    const std::uint64_t row_seed = Rng::mix(cfg.seed, fnv1a64(r.period_id));
    if (models.lda) {
      const auto bow = vocab::to_bow(doc, models.lda->vocab);
      const auto tv = topics::infer_topics(*models.lda, bow, 100, 20, Rng::mix(row_seed, 1));
      lda_fallbacks += tv.oov_fallback;
      x.values.insert(x.values.end(), tv.weights.begin(), tv.weights.end());
    }
    if (models.pv) {
      const auto it = models.pv->doc_index.find(r.period_id);
      if (it != models.pv->doc_index.end()) {
        const int dim = models.pv->config.vector_size;
        const double* v = models.pv->doc_vecs.data() +
                          static_cast<std::size_t>(it->second) * dim;
        x.values.insert(x.values.end(), v, v + dim);
      } else {
        const auto iv = embeddings::infer_vector(*models.pv, doc.tokens, -1,
                                                 Rng::mix(row_seed, 2));
        pv_fallbacks += iv.oov_fallback;
        x.values.insert(x.values.end(), iv.values.begin(), iv.values.end());
      }
    }
    if (cfg.use_structured) {
      const auto& s = r.structured;
      x.values.push_back(s.age_admission);
      x.values.push_back(s.gender == "M" ? 1.0 : 0.0);
      x.values.push_back(static_cast<double>(s.num_words));
      x.values.push_back(static_cast<double>(s.last_note_ts - s.first_note_ts) / 86400.0);
      x.values.push_back(static_cast<double>(s.n_meds_prescribed));
      x.values.push_back(static_cast<double>(s.n_meds_administered));
      x.values.push_back(s.has_diagnosis ? 1.0 : 0.0);
      x.values.push_back(static_cast<double>(s.admission_start_hour));
    }
  }
  features::validate(x);
  if (warnings) {
    if (lda_fallbacks > 0)
      warnings->push_back(std::to_string(lda_fallbacks) +
                          " rows had no in-vocabulary tokens; topic weights are uniform");
    if (pv_fallbacks > 0)
      warnings->push_back(std::to_string(pv_fallbacks) +
                          " rows had no in-vocabulary tokens; embedding is the zero vector");
  }
  return x;
}

std::string describe_cell(const PipelineConfig& config, int cell) {
  std::ostringstream out;
  if (config.classifier == ClassifierKind::forest) {
    if (cell < 0 || cell >= static_cast<int>(config.forest_grid.size()))
      throw validation_error("grid cell out of range");
    const auto& c = config.forest_grid[cell];
    out << "min_samples_leaf=" << c.min_samples_leaf << " max_features=";
    if (c.max_features == 0)
      out << "sqrt";
    else
      out << c.max_features;
    out << " criterion=" << (c.criterion == forest::Criterion::gini ? "gini" : "entropy")
        << " n_estimators=" << c.n_estimators;
  } else {
    if (cell < 0 || cell >= static_cast<int>(config.svm_grid.size()))
      throw validation_error("grid cell out of range");
    const auto& c = config.svm_grid[cell];
    out << "C=" << c.C << " gamma=" << c.gamma;
  }
  return out.str();
}

namespace {

struct FitScores {
  std::vector<double> scores;
  std::vector<std::string> warnings;
};

// One classifier fit on train rows, probabilities for eval rows. The svm
// path standardizes every column with train statistics only.
FitScores fit_and_score(const PipelineConfig& config, const features::FeatureMatrix& x,
                        const std::vector<int>& y,
                        const std::vector<std::size_t>& train_rows,
                        const std::vector<std::size_t>& eval_rows, int cell,
                        std::uint64_t seed, int jobs,
                        classifiers::TrainedClassifier* keep_model) {
  FitScores out;
  auto xtr = features::take_rows(x, train_rows);
  auto xev = features::take_rows(x, eval_rows);
  std::vector<int> ytr;
  ytr.reserve(train_rows.size());
  for (const auto r : train_rows) ytr.push_back(y[r]);

  if (config.classifier == ClassifierKind::svm) {
    const auto params = features::fit_standardize(xtr);
    out.warnings.insert(out.warnings.end(), params.warnings.begin(), params.warnings.end());
    xtr = features::apply_standardize(xtr, params);
    xev = features::apply_standardize(xev, params);
    auto cfg = config.svm_grid[cell];
    cfg.seed = seed;
    auto model = classifiers::train_svm(xtr, ytr, cfg);
    out.warnings.insert(out.warnings.end(), model.warnings().begin(), model.warnings().end());
    out.scores = classifiers::predict_proba(model, xev);
    if (keep_model) *keep_model = std::move(model);
  } else {
    auto cfg = config.forest_grid[cell];
    cfg.seed = seed;
    auto model = classifiers::train_forest(xtr, ytr, cfg, jobs);
    out.warnings.insert(out.warnings.end(), model.warnings().begin(), model.warnings().end());
    out.scores = classifiers::predict_proba(model, xev);
    if (keep_model) *keep_model = std::move(model);
  }
  return out;
}

}  // namespace

NestedCvResult nested_cv(const std::vector<corpus::PeriodRecord>& records,
                         const std::vector<textnorm::TokenDoc>& docs,
                         const PipelineConfig& config, int jobs) {
  if (records.empty()) throw validation_error("dataset is empty");
  if (config.k_outer < 2 || config.k_inner < 2)
    throw validation_error("fold counts must be at least 2");
  const int n_cells = static_cast<int>(config.classifier == ClassifierKind::forest
                                           ? config.forest_grid.size()
                                           : config.svm_grid.size());
  if (n_cells == 0) throw validation_error("the hyperparameter grid is empty");
  if (jobs < 1) throw validation_error("jobs must be at least 1");

  std::vector<int> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.label ? 1 : 0);
  if (!has_both_classes(y)) throw validation_error("dataset needs both outcome classes");

  const auto lookup = doc_lookup(docs);
  for (const auto& r : records)
    if (!lookup.count(r.period_id))
      throw validation_error("no token doc for period " + r.period_id);

  NestedCvResult result;
  result.config = config;
  std::vector<std::string> raw_warnings;

  result.plan = make_folds(records, config.k_outer, config.seed);
  result.plan.k_inner = config.k_inner;
  result.plan.inner.resize(config.k_outer);

  // shared-corpus mode: one representation over every doc, features cached
  features::FeatureMatrix shared_x;
  if (!config.representation_per_fold) {
    const auto models = train_representation(docs, config);
    shared_x = build_features(models, records, docs, config, &raw_warnings);
  }

  auto selection_value = [&](const std::vector<double>& s, const std::vector<int>& labels) {
    return config.selection == SelectionMetric::pr_auc ? metrics::pr_auc(s, labels)
                                                       : metrics::roc_auc(s, labels);
  };

  std::vector<double> fold_pr, fold_roc, fold_f2, fold_thresholds;
  for (int f = 0; f < config.k_outer; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (result.plan.outer.at(records[i].patient_id) == f)
        test_rows.push_back(i);
      else
        train_rows.push_back(i);
    }
    const std::string fold_tag = "outer fold " + std::to_string(f);
    auto classes_of = [&](const std::vector<std::size_t>& rows) {
      std::vector<int> sub;
      sub.reserve(rows.size());
      for (const auto r : rows) sub.push_back(y[r]);
      return sub;
    };
    if (!has_both_classes(classes_of(train_rows)))
      throw runtime_failure(fold_tag + " training split has a single outcome class");
    if (!has_both_classes(classes_of(test_rows)))
      throw metrics::undefined_metric(
          fold_tag + " test split has a single outcome class; metrics are undefined");

    // strict mode: representation retrained on this fold's training docs only
    features::FeatureMatrix fold_x;
    const features::FeatureMatrix* x = &shared_x;
    if (config.representation_per_fold) {
      std::vector<textnorm::TokenDoc> train_docs;
      train_docs.reserve(train_rows.size());
      for (const auto r : train_rows) train_docs.push_back(*lookup.at(records[r].period_id));
      const auto models = train_representation(train_docs, config);
      fold_x = build_features(models, records, docs, config, &raw_warnings);
      x = &fold_x;
    }

    std::vector<std::string> train_patients;
    train_patients.reserve(train_rows.size());
    for (const auto r : train_rows) train_patients.push_back(records[r].patient_id);
    const auto inner_plan =
        make_folds(train_patients, config.k_inner, Rng::mix(config.seed, 0xF01D + f));
    result.plan.inner[f] = inner_plan.outer;

    std::vector<std::vector<std::size_t>> inner_train(config.k_inner), inner_val(config.k_inner);
    for (const auto r : train_rows) {
      const int j = inner_plan.outer.at(records[r].patient_id);
      for (int jj = 0; jj < config.k_inner; ++jj)
        (jj == j ? inner_val[jj] : inner_train[jj]).push_back(r);
    }
    std::vector<char> usable(config.k_inner, 0);
    int n_usable = 0;
    for (int j = 0; j < config.k_inner; ++j) {
      usable[j] = has_both_classes(classes_of(inner_train[j])) &&
                  has_both_classes(classes_of(inner_val[j]));
      if (usable[j])
        ++n_usable;
      else
        raw_warnings.push_back(fold_tag + ": inner fold " + std::to_string(j) +
                               " skipped (single outcome class)");
    }
    if (n_usable == 0)
      throw runtime_failure(fold_tag +
                            ": every inner evaluation was skipped; cannot select hyperparameters");

    const std::size_t n_tasks = static_cast<std::size_t>(n_cells) * config.k_inner;
    std::vector<double> cell_scores(n_tasks, std::nan(""));
    std::vector<std::vector<std::string>> task_warnings(n_tasks);
    parallel_for(n_tasks, static_cast<unsigned>(jobs), [&](std::size_t t) {
      const int cell = static_cast<int>(t) / config.k_inner;
      const int j = static_cast<int>(t) % config.k_inner;
      if (!usable[j]) return;
      const std::uint64_t seed =
          Rng::mix(config.seed, Rng::mix(0xCE11 + f, (cell + 1) * 1000 + j));
      const auto fit = fit_and_score(config, *x, y, inner_train[j], inner_val[j], cell,
                                     seed, 1, nullptr);
      cell_scores[t] = selection_value(fit.scores, classes_of(inner_val[j]));
      task_warnings[t] = fit.warnings;
    });
    for (const auto& tw : task_warnings)
      raw_warnings.insert(raw_warnings.end(), tw.begin(), tw.end());

    int winner = -1;
    double best_mean = 0.0;
    for (int cell = 0; cell < n_cells; ++cell) {
      double sum = 0.0;
      for (int j = 0; j < config.k_inner; ++j)
        if (usable[j]) sum += cell_scores[static_cast<std::size_t>(cell) * config.k_inner + j];
      const double mean = sum / n_usable;
      if (winner < 0 || mean > best_mean) {  // ties keep the earliest cell
        winner = cell;
        best_mean = mean;
      }
    }

    classifiers::TrainedClassifier refit;
    const auto fit = fit_and_score(config, *x, y, train_rows, test_rows, winner,
                                   Rng::mix(config.seed, 0x5EED + f), jobs, &refit);
    raw_warnings.insert(raw_warnings.end(), fit.warnings.begin(), fit.warnings.end());

    FoldResult fr;
    fr.fold = f;
    for (const auto r : test_rows) fr.period_ids.push_back(records[r].period_id);
    fr.labels = classes_of(test_rows);
    fr.scores = fit.scores;
    fr.chosen_cell = winner;
    fr.inner_mean = best_mean;
    fr.pr_auc = metrics::pr_auc(fr.scores, fr.labels);
    fr.roc_auc = metrics::roc_auc(fr.scores, fr.labels);
    fr.f2 = metrics::f2_max(fr.scores, fr.labels);
    if (config.classifier == ClassifierKind::forest)
      fr.importances = classifiers::feature_importances(refit);
    fold_pr.push_back(fr.pr_auc);
    fold_roc.push_back(fr.roc_auc);
    fold_f2.push_back(fr.f2.value);
    fold_thresholds.push_back(fr.f2.threshold);
    result.folds.push_back(std::move(fr));
  }

  result.summary.pr_auc = metrics::summarize(fold_pr);
  result.summary.roc_auc = metrics::summarize(fold_roc);
  result.summary.f2_max = metrics::summarize(fold_f2);
  result.summary.f2_thresholds = fold_thresholds;
  result.warnings = dedupe_warnings(raw_warnings);
  return result;
}

KappaReport compare_classifiers(const NestedCvResult& a, const NestedCvResult& b) {
  if (!(a.plan == b.plan))
    throw validation_error("fold plans differ; runs are not comparable");
  if (a.folds.size() != b.folds.size())
    throw validation_error("runs have different fold counts");

  // align run b to run a's row order per fold
  std::vector<std::vector<double>> a_scores(a.folds.size()), b_scores(a.folds.size());
  std::vector<double> pooled_a, pooled_b;
  std::vector<int> pooled_y;
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    const auto& fa = a.folds[f];
    const auto& fb = b.folds[f];
    if (fa.period_ids.size() != fb.period_ids.size())
      throw validation_error("runs cover different rows");
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < fb.period_ids.size(); ++i) where[fb.period_ids[i]] = i;
    for (std::size_t i = 0; i < fa.period_ids.size(); ++i) {
      const auto it = where.find(fa.period_ids[i]);
      if (it == where.end())
        throw validation_error("runs cover different rows");
      if (fa.labels[i] != fb.labels[it->second])
        throw validation_error("runs disagree on the label of " + fa.period_ids[i]);
      a_scores[f].push_back(fa.scores[i]);
      b_scores[f].push_back(fb.scores[it->second]);
      pooled_a.push_back(fa.scores[i]);
      pooled_b.push_back(fb.scores[it->second]);
      pooled_y.push_back(fa.labels[i]);
    }
  }

  KappaReport report;
  report.threshold_a = metrics::f2_max(pooled_a, pooled_y).threshold;
  report.threshold_b = metrics::f2_max(pooled_b, pooled_y).threshold;
  std::vector<double> per_fold;
  for (std::size_t f = 0; f < a_scores.size(); ++f) {
    std::vector<int> la, lb;
    for (std::size_t i = 0; i < a_scores[f].size(); ++i) {
      la.push_back(a_scores[f][i] >= report.threshold_a ? 1 : 0);
      lb.push_back(b_scores[f][i] >= report.threshold_b ? 1 : 0);
    }
    per_fold.push_back(metrics::cohens_kappa(la, lb));
  }
  report.kappa = metrics::summarize(per_fold);
  report.sweep = metrics::kappa_sweep(pooled_a, pooled_b, 200);
  return report;
}

ImportanceAudit importance_audit(const NestedCvResult& run) {
  if (run.config.classifier != ClassifierKind::forest)
    throw validation_error("importance audit needs a forest run");
  if (run.folds.empty()) throw validation_error("run has no folds");

  ImportanceAudit audit;
  std::unordered_map<std::string, int> repeats;
  std::unordered_map<std::string, double> totals;
  for (const auto& fr : run.folds) {
    if (fr.importances.entries.empty())
      throw validation_error("fold result carries no importances");
    std::vector<std::pair<std::string, double>> top;
    for (const auto& [name, value] : fr.importances.entries) {
      totals[name] += value;
      if (top.size() < 10) {
        top.emplace_back(name, value);
        ++repeats[name];
      }
    }
    audit.top_per_fold.push_back(std::move(top));
  }
  for (const auto& [name, count] : repeats) audit.by_repetition.emplace_back(name, count);
  std::sort(audit.by_repetition.begin(), audit.by_repetition.end(),
            [](const auto& l, const auto& r) {
              return l.second != r.second ? l.second > r.second : l.first < r.first;
            });
  for (const auto& [name, total] : totals) audit.by_total.emplace_back(name, total);
  std::sort(audit.by_total.begin(), audit.by_total.end(), [](const auto& l, const auto& r) {
    return l.second != r.second ? l.second > r.second : l.first < r.first;
  });
  if (audit.by_total.size() > 10) audit.by_total.resize(10);
  return audit;
}

}  // namespace notewatch::harness
