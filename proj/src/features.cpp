#include "notewatch/features.hpp"

#include <cmath>
#include <unordered_set>

#include "notewatch/common.hpp"

namespace notewatch::features {

void validate(const FeatureMatrix& m) {
  if (m.names.empty()) throw validation_error("feature matrix has no columns");
  std::unordered_set<std::string> seen;
  for (const auto& n : m.names) {
    if (n.empty()) throw validation_error("empty feature name");
    if (!seen.insert(n).second)
      throw validation_error("duplicate feature name: " + n);
  }
  if (m.values.size() != m.rows * m.names.size())
    throw validation_error("feature matrix buffer does not match rows x cols");
  for (double v : m.values)
    if (!std::isfinite(v)) throw validation_error("non-finite feature value");
}

std::array<double, 2> class_weights(const std::vector<int>& labels) {
  long n[2] = {0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw validation_error("labels must be 0 or 1");
    ++n[y];
  }
  if (n[0] == 0 || n[1] == 0)
    throw validation_error("both classes must be present to weight them");
  const double total = static_cast<double>(labels.size());
  return {total / (2.0 * n[0]), total / (2.0 * n[1])};
}

StandardizeParams fit_standardize(const FeatureMatrix& train) {
  validate(train);
  if (train.rows == 0) throw validation_error("cannot standardize an empty matrix");
  const std::size_t d = train.cols();
  StandardizeParams p;
  p.mean.assign(d, 0.0);
  p.scale.assign(d, 1.0);
  for (std::size_t r = 0; r < train.rows; ++r)
    for (std::size_t c = 0; c < d; ++c) p.mean[c] += train.at(r, c);
  for (std::size_t c = 0; c < d; ++c) p.mean[c] /= static_cast<double>(train.rows);
  for (std::size_t c = 0; c < d; ++c) {
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) {
      const double diff = train.at(r, c) - p.mean[c];
      ss += diff * diff;
    }
    const double var = ss / static_cast<double>(train.rows);
    if (var > 0.0) {
      p.scale[c] = std::sqrt(var);
    } else {
      p.warnings.push_back("column " + train.names[c] +
                           " has zero variance; centered only");
    }
  }
  return p;
}

FeatureMatrix apply_standardize(const FeatureMatrix& x, const StandardizeParams& p) {
  if (x.cols() != p.mean.size())
    throw validation_error("standardize parameters do not match column count");
  FeatureMatrix out = x;
  for (std::size_t r = 0; r < out.rows; ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out.at(r, c) = (out.at(r, c) - p.mean[c]) / p.scale[c];
  return out;
}

FeatureMatrix take_rows(const FeatureMatrix& x, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.names = x.names;
  out.rows = rows.size();
  out.values.reserve(rows.size() * x.cols());
  for (const std::size_t r : rows) {
    if (r >= x.rows) throw validation_error("row index out of range");
    out.values.insert(out.values.end(), x.row(r), x.row(r) + x.cols());
  }
  return out;
}

}  // namespace notewatch::features
