#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace notewatch::features {

struct FeatureMatrix {
  std::vector<std::string> names;  // unique column names
  std::vector<double> values;      // rows x names.size() row-major
  std::size_t rows = 0;

  std::size_t cols() const { return names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * names.size() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * names.size() + c]; }
  const double* row(std::size_t r) const { return values.data() + r * names.size(); }
  double* row(std::size_t r) { return values.data() + r * names.size(); }
};

// Throws on NaN/Inf values, duplicate or empty names, or a size mismatch
// between rows x cols and the value buffer.
void validate(const FeatureMatrix& m);

// Balanced weights w_c = N / (2 * N_c) over binary labels; index 0 holds
// the negative-class weight. Fatal when a class is missing or a label is
// outside {0, 1}.
std::array<double, 2> class_weights(const std::vector<int>& labels);

struct StandardizeParams {
  std::vector<double> mean;
  std::vector<double> scale;  // population sd; constant columns get 1
  std::vector<std::string> warnings;
};

// Per-column z-score statistics from the training matrix only; apply uses
// those statistics on any matrix with the same columns.
StandardizeParams fit_standardize(const FeatureMatrix& train);
FeatureMatrix apply_standardize(const FeatureMatrix& x, const StandardizeParams& p);

// Row subset in the given order; indices may repeat. Out of range is fatal.
FeatureMatrix take_rows(const FeatureMatrix& x, const std::vector<std::size_t>& rows);

}  // namespace notewatch::features
