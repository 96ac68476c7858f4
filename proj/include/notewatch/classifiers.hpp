#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "notewatch/forest.hpp"
#include "notewatch/svm.hpp"

namespace notewatch::classifiers {

using features::FeatureMatrix;

enum class Kind { forest, svm };

// Holds either trained model behind one prediction surface.
struct TrainedClassifier {
  std::variant<forest::ForestModel, svm::SvmModel> model;

  Kind kind() const { return model.index() == 0 ? Kind::forest : Kind::svm; }
  const std::vector<std::string>& feature_names() const;
  const std::vector<std::string>& warnings() const;
};

// Feature relevance ranking, importance descending, ties by name.
// Importances are nonnegative and sum to 1 within 1e-9.
struct ImportanceReport {
  std::vector<std::pair<std::string, double>> entries;
};

TrainedClassifier train_forest(const FeatureMatrix& x, const std::vector<int>& y01,
                               const forest::RandomForestConfig& cfg, int jobs = 1);
TrainedClassifier train_svm(const FeatureMatrix& x, const std::vector<int>& y01,
                            const svm::SvmConfig& cfg);

// Rows must carry the training feature columns; forest gives the mean tree
// vote, svm the calibrated sigmoid of the decision value.
std::vector<double> predict_proba(const TrainedClassifier& m, const FeatureMatrix& x);

// Forest only; an svm model has no impurity-based importances.
ImportanceReport feature_importances(const TrainedClassifier& m);

}  // namespace notewatch::classifiers
