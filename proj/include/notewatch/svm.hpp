#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "notewatch/features.hpp"

namespace notewatch::svm {

using features::FeatureMatrix;

struct SvmConfig {
  double C = 1.0;
  double gamma = 0.1;       // RBF k(x,z) = exp(-gamma * ||x-z||^2)
  double tolerance = 1e-3;  // maximal-violating-pair stopping threshold
  long max_iterations = 1000000;  // pair updates before giving up
  int platt_folds = 3;
  std::uint64_t seed = 0;
  std::size_t kernel_cache_rows = 1024;
};

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;       // f(x) = sum_i alpha_i y_i k(x_i, x) + bias
  double objective = 0.0;  // dual 0.5 a'Qa - e'a at return
  long iterations = 0;
  bool converged = false;
};

// Dual solver with per-sample box alpha_i <= C * w_{y_i}; y01 holds 0/1
// labels mapped internally to -1/+1. Working-set selection picks the
// maximal violating pair; kernel rows are cached with an LRU budget.
// Hitting max_iterations returns the best iterate with converged=false.
SmoResult smo_solve(const FeatureMatrix& x, const std::vector<int>& y01,
                    const SvmConfig& cfg, const std::array<double, 2>& weights);

struct SvmModel {
  SvmConfig config;
  std::vector<std::string> feature_names;
  std::vector<double> support;  // n_sv x d row-major
  std::vector<double> coef;     // alpha_i * y_i per support vector
  double bias = 0.0;
  // P(y=1 | f) = 1 / (1 + exp(platt_a * f + platt_b))
  double platt_a = -1.0;
  double platt_b = 0.0;
  bool converged = true;
  bool platt_in_sample = false;  // calibration fell back to training scores
  std::vector<std::string> warnings;

  std::size_t n_sv() const { return coef.size(); }
};

// Balanced class weights, SMO fit on the full set, then Platt scaling fit
// on decision values of held-out folds (stratified, seeded). When any
// calibration fold cannot be trained (a class missing), calibration falls
// back to in-sample decision values with a warning.
SvmModel train_svm(const FeatureMatrix& x, const std::vector<int>& y01,
                   const SvmConfig& cfg);

std::vector<double> decision_values(const SvmModel& m, const FeatureMatrix& x);
std::vector<double> predict_proba(const SvmModel& m, const FeatureMatrix& x);

// Newton fit of the sigmoid P(y=1|f) = 1/(1+exp(a f + b)) with smoothed
// targets; returns (a, b).
std::pair<double, double> fit_platt(const std::vector<double>& decision,
                                    const std::vector<int>& y01);

}  // namespace notewatch::svm
