#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "notewatch/features.hpp"

namespace notewatch::forest {

using features::FeatureMatrix;

enum class Criterion { gini, entropy };

struct RandomForestConfig {
  int n_estimators = 500;
  int min_samples_leaf = 3;  // weighted minimum per child
  int max_features = 0;      // columns tried per split; 0 = floor(sqrt(cols))
  Criterion criterion = Criterion::gini;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int vote = 0;  // leaf only: weighted-majority class, ties toward 0
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestModel {
  RandomForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  // Mean decrease in impurity: per-tree importances normalized, averaged
  // over trees that split at all, renormalized to sum 1. A forest with no
  // splits anywhere falls back to uniform importances with a warning.
  std::vector<double> importances;
  std::vector<std::string> warnings;
};

// Bootstrap-sampled trees with balanced class weights folded into the
// impurity and leaf counts. Each tree draws from its own seeded stream
// (base seed + tree index) so training is parallelism-invariant.
// weights_override replaces the balanced weights (testing knob).
ForestModel train_forest(const FeatureMatrix& x, const std::vector<int>& y,
                         const RandomForestConfig& cfg, int jobs = 1,
                         const std::array<double, 2>* weights_override = nullptr);

int tree_vote(const Tree& t, const double* row);

// Mean of per-tree {0,1} votes; denominator is exactly n_estimators.
std::vector<double> predict_proba(const ForestModel& m, const FeatureMatrix& x);

}  // namespace notewatch::forest
