#include "notewatch/classifiers.hpp"

#include <algorithm>

#include "notewatch/common.hpp"

namespace notewatch::classifiers {

const std::vector<std::string>& TrainedClassifier::feature_names() const {
  if (const auto* f = std::get_if<forest::ForestModel>(&model)) return f->feature_names;
  return std::get<svm::SvmModel>(model).feature_names;
}

const std::vector<std::string>& TrainedClassifier::warnings() const {
  if (const auto* f = std::get_if<forest::ForestModel>(&model)) return f->warnings;
  return std::get<svm::SvmModel>(model).warnings;
}

TrainedClassifier train_forest(const FeatureMatrix& x, const std::vector<int>& y01,
                               const forest::RandomForestConfig& cfg, int jobs) {
  return {forest::train_forest(x, y01, cfg, jobs)};
}

TrainedClassifier train_svm(const FeatureMatrix& x, const std::vector<int>& y01,
                            const svm::SvmConfig& cfg) {
  return {svm::train_svm(x, y01, cfg)};
}

std::vector<double> predict_proba(const TrainedClassifier& m, const FeatureMatrix& x) {
  if (const auto* f = std::get_if<forest::ForestModel>(&m.model))
    return forest::predict_proba(*f, x);
  return svm::predict_proba(std::get<svm::SvmModel>(m.model), x);
}

ImportanceReport feature_importances(const TrainedClassifier& m) {
  const auto* f = std::get_if<forest::ForestModel>(&m.model);
  if (!f) throw validation_error("feature importances are only defined for forest models");
  ImportanceReport rep;
  rep.entries.reserve(f->feature_names.size());
  for (std::size_t i = 0; i < f->feature_names.size(); ++i)
    rep.entries.emplace_back(f->feature_names[i], f->importances[i]);
  std::sort(rep.entries.begin(), rep.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return rep;
}

}  // namespace notewatch::classifiers
