#include "notewatch/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "notewatch/common.hpp"
#include "notewatch/parallel.hpp"
#include "notewatch/rng.hpp"

namespace notewatch::forest {

namespace {

double impurity(double w0, double w1, Criterion crit) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p0 = w0 / w, p1 = w1 / w;
  if (crit == Criterion::gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

struct Builder {
  const FeatureMatrix& x;
  const std::vector<int>& y;
  const std::array<double, 2>& w;
  const RandomForestConfig& cfg;
  int max_features;
  Rng rng;
  Tree tree;
  std::vector<double> importances;  // unnormalized MDI for this tree
  double root_weight = 0.0;
  std::vector<int> samples;  // bootstrap sample indices, partitioned in place

  std::vector<int> feat_pool;
  std::vector<std::pair<double, int>> sorted;  // (value, sample) scratch

  Builder(const FeatureMatrix& x_, const std::vector<int>& y_,
          const std::array<double, 2>& w_, const RandomForestConfig& cfg_,
          int mf, std::uint64_t tree_seed)
      : x(x_), y(y_), w(w_), cfg(cfg_), max_features(mf), rng(tree_seed) {
    importances.assign(x.cols(), 0.0);
    feat_pool.resize(x.cols());
    std::iota(feat_pool.begin(), feat_pool.end(), 0);
  }

  void run() {
    samples.resize(x.rows);
    for (auto& s : samples)
      s = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(x.rows)));
    double w0 = 0.0, w1 = 0.0;
    for (int s : samples) (y[s] == 0 ? w0 : w1) += w[y[s]];
    root_weight = w0 + w1;
    tree.nodes.emplace_back();
    build(0, 0, samples.size(), w0, w1);
  }

  // grows the node covering samples[begin, end)
  void build(int node, std::size_t begin, std::size_t end, double w0, double w1) {
    const double node_imp = impurity(w0, w1, cfg.criterion);
    int best_feat = -1;
    double best_thresh = 0.0, best_decrease = 0.0;
    double best_lw0 = 0.0, best_lw1 = 0.0;

    if (w0 > 0.0 && w1 > 0.0) {
      // candidate columns for this node
      for (int pick = 0; pick < max_features; ++pick) {
        const std::size_t swap_with =
            pick + static_cast<std::size_t>(rng.uniform_int(feat_pool.size() - pick));
        std::swap(feat_pool[pick], feat_pool[swap_with]);
        const int f = feat_pool[pick];

        sorted.clear();
        for (std::size_t i = begin; i < end; ++i)
          sorted.emplace_back(x.at(static_cast<std::size_t>(samples[i]), f), samples[i]);
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double lw0 = 0.0, lw1 = 0.0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          const int s = sorted[i].second;
          (y[s] == 0 ? lw0 : lw1) += w[y[s]];
          if (sorted[i].first == sorted[i + 1].first) continue;
          const double lw = lw0 + lw1, rw = (w0 + w1) - lw;
          if (lw < cfg.min_samples_leaf || rw < cfg.min_samples_leaf) continue;
          const double decrease =
              node_imp - (lw / (w0 + w1)) * impurity(lw0, lw1, cfg.criterion) -
              (rw / (w0 + w1)) * impurity(w0 - lw0, w1 - lw1, cfg.criterion);
          if (decrease > best_decrease) {
            best_decrease = decrease;
            best_feat = f;
            best_thresh = (sorted[i].first + sorted[i + 1].first) / 2.0;
            best_lw0 = lw0;
            best_lw1 = lw1;
          }
        }
      }
    }

    if (best_feat < 0 || best_decrease <= 0.0) {
      tree.nodes[node].vote = w1 > w0 ? 1 : 0;
      return;
    }

    importances[best_feat] += ((w0 + w1) / root_weight) * best_decrease;

    const int f = best_feat;
    const double t = best_thresh;
    auto mid_it = std::stable_partition(
        samples.begin() + begin, samples.begin() + end,
        [&](int s) { return x.at(static_cast<std::size_t>(s), f) <= t; });
    const std::size_t mid = static_cast<std::size_t>(mid_it - samples.begin());

    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].feature = f;
    tree.nodes[node].threshold = t;
    tree.nodes[node].left = left;
    tree.nodes[node].right = right;

    build(left, begin, mid, best_lw0, best_lw1);
    build(right, mid, end, w0 - best_lw0, w1 - best_lw1);
  }
};

}  // namespace

ForestModel train_forest(const FeatureMatrix& x, const std::vector<int>& y,
                         const RandomForestConfig& cfg, int jobs,
                         const std::array<double, 2>* weights_override) {
  features::validate(x);
  if (y.size() != x.rows) throw validation_error("label count does not match rows");
  if (cfg.n_estimators < 1) throw validation_error("n_estimators must be at least 1");
  if (cfg.min_samples_leaf < 1) throw validation_error("min_samples_leaf must be at least 1");
  if (cfg.max_features < 0) throw validation_error("max_features must be non-negative");

  const std::array<double, 2> balanced = features::class_weights(y);  // validates labels
  std::array<double, 2> weights = weights_override ? *weights_override : balanced;
  if (!(weights[0] > 0.0) || !(weights[1] > 0.0))
    throw validation_error("class weights must be positive");
  // normalize total weighted mass to the sample count so the weighted leaf
  // minimum and split choices are invariant to a common weight scale;
  // balanced weights already carry mass N, leaving them bit-identical
  long counts[2] = {0, 0};
  for (int label : y) ++counts[label];
  const double mass = static_cast<double>(counts[0]) * weights[0] +
                      static_cast<double>(counts[1]) * weights[1];
  const double rescale = static_cast<double>(y.size()) / mass;
  weights[0] *= rescale;
  weights[1] *= rescale;

  ForestModel m;
  m.config = cfg;
  m.feature_names = x.names;

  const int d = static_cast<int>(x.cols());
  int mf = cfg.max_features;
  if (mf == 0) mf = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));
  if (mf > d) {
    m.warnings.push_back("max_features " + std::to_string(mf) + " clamped to " +
                         std::to_string(d) + " columns");
    mf = d;
  }

  m.trees.resize(cfg.n_estimators);
  std::vector<std::vector<double>> tree_imps(cfg.n_estimators);
  parallel_for(static_cast<std::size_t>(cfg.n_estimators), jobs, [&](std::size_t t) {
    Builder b(x, y, weights, cfg, mf, cfg.seed + t);
    b.run();
    m.trees[t] = std::move(b.tree);
    tree_imps[t] = std::move(b.importances);
  });

  // per-tree normalization, then average over trees that split, renormalize
  m.importances.assign(x.cols(), 0.0);
  int contributing = 0;
  for (const auto& imp : tree_imps) {
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total <= 0.0) continue;
    ++contributing;
    for (std::size_t c = 0; c < imp.size(); ++c) m.importances[c] += imp[c] / total;
  }
  if (contributing == 0) {
    m.warnings.push_back("no tree found a useful split; importances are uniform");
    m.importances.assign(x.cols(), 1.0 / static_cast<double>(x.cols()));
  } else {
    const double total =
        std::accumulate(m.importances.begin(), m.importances.end(), 0.0);
    for (auto& v : m.importances) v /= total;
  }
  return m;
}

int tree_vote(const Tree& t, const double* row) {
  int node = 0;
  while (t.nodes[node].feature >= 0) {
    const TreeNode& n = t.nodes[node];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return t.nodes[node].vote;
}

std::vector<double> predict_proba(const ForestModel& m, const FeatureMatrix& x) {
  if (x.names != m.feature_names)
    throw validation_error("feature columns do not match the trained model");
  std::vector<double> out(x.rows, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    long votes = 0;
    for (const auto& t : m.trees) votes += tree_vote(t, x.row(r));
    out[r] = static_cast<double>(votes) / static_cast<double>(m.trees.size());
  }
  return out;
}

}  // namespace notewatch::forest
