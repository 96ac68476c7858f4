#include "notewatch/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "notewatch/common.hpp"
#include "notewatch/rng.hpp"

namespace notewatch::svm {

namespace {

constexpr double kTau = 1e-12;  // quadratic coefficient floor

class KernelCache {
 public:
  KernelCache(const FeatureMatrix& x, double gamma, std::size_t budget)
      : x_(x), gamma_(gamma), budget_(std::max<std::size_t>(2, budget)) {
    sqnorm_.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
      double s = 0.0;
      const double* row = x.row(i);
      for (std::size_t c = 0; c < x.cols(); ++c) s += row[c] * row[c];
      sqnorm_[i] = s;
    }
  }

  const std::vector<double>& row(int i) {
    const auto it = index_.find(i);
    if (it != index_.end()) {
      rows_.splice(rows_.begin(), rows_, it->second);
      return it->second->second;
    }
    if (rows_.size() >= budget_) {
      index_.erase(rows_.back().first);
      rows_.pop_back();
    }
    rows_.emplace_front(i, compute(i));
    index_[i] = rows_.begin();
    return rows_.front().second;
  }

 private:
  std::vector<double> compute(int i) const {
    std::vector<double> k(x_.rows);
    const double* ri = x_.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < x_.rows; ++j) {
      const double* rj = x_.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < x_.cols(); ++c) dot += ri[c] * rj[c];
      const double d2 = std::max(0.0, sqnorm_[i] + sqnorm_[j] - 2.0 * dot);
      k[j] = std::exp(-gamma_ * d2);
    }
    return k;
  }

  const FeatureMatrix& x_;
  double gamma_;
  std::size_t budget_;
  std::vector<double> sqnorm_;
  std::list<std::pair<int, std::vector<double>>> rows_;
  std::unordered_map<int, std::list<std::pair<int, std::vector<double>>>::iterator> index_;
};

void validate_config(const SvmConfig& cfg) {
  if (!(cfg.C > 0.0)) throw validation_error("C must be positive");
  if (!(cfg.gamma > 0.0)) throw validation_error("gamma must be positive");
  if (!(cfg.tolerance > 0.0)) throw validation_error("tolerance must be positive");
  if (cfg.max_iterations < 1) throw validation_error("max_iterations must be at least 1");
  if (cfg.platt_folds < 2) throw validation_error("platt_folds must be at least 2");
}

}  // namespace

SmoResult smo_solve(const FeatureMatrix& x, const std::vector<int>& y01,
                    const SvmConfig& cfg, const std::array<double, 2>& weights) {
  features::validate(x);
  validate_config(cfg);
  if (y01.size() != x.rows) throw validation_error("label count does not match rows");
  const std::size_t n = x.rows;

  std::vector<double> yd(n), box(n);
  int seen[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (y01[i] != 0 && y01[i] != 1) throw validation_error("labels must be 0 or 1");
    seen[y01[i]] = 1;
    yd[i] = y01[i] == 1 ? 1.0 : -1.0;
    box[i] = cfg.C * weights[y01[i]];
  }
  if (!(seen[0] && seen[1])) throw validation_error("labels must include both classes");

  KernelCache cache(x, cfg.gamma, cfg.kernel_cache_rows);
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);  // G = Q a - e

  SmoResult res;
  const double inf = std::numeric_limits<double>::infinity();
  long iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    // maximal violating pair over -y G
    int i = -1, j = -1;
    double m_up = -inf, m_low = inf;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = -yd[k] * grad[k];
      const bool in_up = (yd[k] > 0 && alpha[k] < box[k]) || (yd[k] < 0 && alpha[k] > 0);
      const bool in_low = (yd[k] > 0 && alpha[k] > 0) || (yd[k] < 0 && alpha[k] < box[k]);
      if (in_up && v > m_up) {
        m_up = v;
        i = static_cast<int>(k);
      }
      if (in_low && v < m_low) {
        m_low = v;
        j = static_cast<int>(k);
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= cfg.tolerance) {
      res.converged = true;
      break;
    }

    const std::vector<double>& ki = cache.row(i);
    const std::vector<double>& kj = cache.row(j);
    const double old_ai = alpha[i], old_aj = alpha[j];

    if (yd[i] != yd[j]) {
      // quad coefficient is the kernel-space squared distance in both branches
      const double quad = std::max(ki[i] + kj[j] - 2.0 * ki[j], kTau);
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else {
        if (alpha[i] < 0) {
          alpha[i] = 0;
          alpha[j] = -diff;
        }
      }
      if (diff > box[i] - box[j]) {
        if (alpha[i] > box[i]) {
          alpha[i] = box[i];
          alpha[j] = box[i] - diff;
        }
      } else {
        if (alpha[j] > box[j]) {
          alpha[j] = box[j];
          alpha[i] = box[j] + diff;
        }
      }
    } else {
      const double quad = std::max(ki[i] + kj[j] - 2.0 * ki[j], kTau);
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > box[i]) {
        if (alpha[i] > box[i]) {
          alpha[i] = box[i];
          alpha[j] = sum - box[i];
        }
      } else {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = sum;
        }
      }
      if (sum > box[j]) {
        if (alpha[j] > box[j]) {
          alpha[j] = box[j];
          alpha[i] = sum - box[j];
        }
      } else {
        if (alpha[i] < 0) {
          alpha[i] = 0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t k = 0; k < n; ++k)
      grad[k] += yd[i] * yd[k] * ki[k] * dai + yd[j] * yd[k] * kj[k] * daj;
  }
  res.iterations = iter;

  // bias from free vectors, else the midpoint of the violation bounds
  double free_sum = 0.0;
  int free_count = 0;
  double m_up = -inf, m_low = inf;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = -yd[k] * grad[k];
    const bool in_up = (yd[k] > 0 && alpha[k] < box[k]) || (yd[k] < 0 && alpha[k] > 0);
    const bool in_low = (yd[k] > 0 && alpha[k] > 0) || (yd[k] < 0 && alpha[k] < box[k]);
    if (in_up) m_up = std::max(m_up, v);
    if (in_low) m_low = std::min(m_low, v);
    if (alpha[k] > 0 && alpha[k] < box[k]) {
      free_sum += v;
      ++free_count;
    }
  }
  res.bias = free_count > 0 ? free_sum / free_count : (m_up + m_low) / 2.0;

  double obj = 0.0;
  for (std::size_t k = 0; k < n; ++k) obj += alpha[k] * (grad[k] - 1.0);
  res.objective = obj / 2.0;
  res.alpha = std::move(alpha);
  return res;
}

std::pair<double, double> fit_platt(const std::vector<double>& decision,
                                    const std::vector<int>& y01) {
  if (decision.size() != y01.size() || decision.empty())
    throw validation_error("calibration needs matching decision values and labels");
  const std::size_t n = decision.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (int y : y01) (y == 1 ? prior1 : prior0) += 1.0;

  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = y01[i] == 1 ? hi : lo;

  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto objective = [&](double pa, double pb) {
    double fval = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fApB = decision[i] * pa + pb;
      if (fApB >= 0)
        fval += t[i] * fApB + std::log1p(std::exp(-fApB));
      else
        fval += (t[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return fval;
  };

  double fval = objective(a, b);
  constexpr int max_newton = 100;
  constexpr double min_step = 1e-10;
  constexpr double sigma = 1e-12;
  for (int it = 0; it < max_newton; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fApB = decision[i] * a + b;
      double p, q;
      if (fApB >= 0) {
        p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
        q = 1.0 / (1.0 + std::exp(-fApB));
      } else {
        p = 1.0 / (1.0 + std::exp(fApB));
        q = std::exp(fApB) / (1.0 + std::exp(fApB));
      }
      const double d2 = p * q;
      h11 += decision[i] * decision[i] * d2;
      h22 += d2;
      h21 += decision[i] * d2;
      const double d1 = t[i] - p;
      g1 += decision[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;  // line search failed
  }
  return {a, b};
}

namespace {

FeatureMatrix take_rows(const FeatureMatrix& x, const std::vector<int>& rows) {
  FeatureMatrix out;
  out.names = x.names;
  out.rows = rows.size();
  out.values.reserve(rows.size() * x.cols());
  for (int r : rows)
    out.values.insert(out.values.end(), x.row(static_cast<std::size_t>(r)),
                      x.row(static_cast<std::size_t>(r)) + x.cols());
  return out;
}

std::vector<double> raw_decision(const FeatureMatrix& train,
                                 const std::vector<double>& alpha,
                                 const std::vector<double>& yd, double bias,
                                 double gamma, const FeatureMatrix& q) {
  std::vector<double> out(q.rows, bias);
  for (std::size_t r = 0; r < q.rows; ++r) {
    const double* qr = q.row(r);
    double acc = 0.0;
    for (std::size_t i = 0; i < train.rows; ++i) {
      if (alpha[i] == 0.0) continue;
      const double* ti = train.row(i);
      double d2 = 0.0;
      for (std::size_t c = 0; c < train.cols(); ++c) {
        const double diff = ti[c] - qr[c];
        d2 += diff * diff;
      }
      acc += alpha[i] * yd[i] * std::exp(-gamma * d2);
    }
    out[r] += acc;
  }
  return out;
}

}  // namespace

SvmModel train_svm(const FeatureMatrix& x, const std::vector<int>& y01,
                   const SvmConfig& cfg) {
  const auto weights = features::class_weights(y01);
  SvmModel m;
  m.config = cfg;
  m.feature_names = x.names;

  const SmoResult full = smo_solve(x, y01, cfg, weights);
  m.converged = full.converged;
  if (!full.converged)
    m.warnings.push_back("dual solver hit the iteration budget; using best iterate");

  std::vector<double> yd(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) yd[i] = y01[i] == 1 ? 1.0 : -1.0;

  m.bias = full.bias;
  for (std::size_t i = 0; i < x.rows; ++i) {
    if (full.alpha[i] <= 0.0) continue;
    m.coef.push_back(full.alpha[i] * yd[i]);
    m.support.insert(m.support.end(), x.row(i), x.row(i) + x.cols());
  }

  // stratified seeded folds for held-out calibration scores
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < x.rows; ++i) (y01[i] == 1 ? pos : neg).push_back(static_cast<int>(i));
  Rng rng(cfg.seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  const int folds = cfg.platt_folds;
  std::vector<int> fold_of(x.rows);
  for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = static_cast<int>(i) % folds;
  for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = static_cast<int>(i) % folds;

  std::vector<double> cal_scores;
  std::vector<int> cal_labels;
  bool feasible = true;
  for (int f = 0; f < folds && feasible; ++f) {
    std::vector<int> tr, ho;
    for (std::size_t i = 0; i < x.rows; ++i)
      (fold_of[i] == f ? ho : tr).push_back(static_cast<int>(i));
    if (ho.empty()) continue;
    int tr_pos = 0, tr_neg = 0;
    for (int i : tr) (y01[i] == 1 ? tr_pos : tr_neg)++;
    if (tr_pos == 0 || tr_neg == 0) {
      feasible = false;
      break;
    }
    const FeatureMatrix fx = take_rows(x, tr);
    std::vector<int> fy;
    for (int i : tr) fy.push_back(y01[i]);
    const SmoResult part = smo_solve(fx, fy, cfg, features::class_weights(fy));
    std::vector<double> fyd(fy.size());
    for (std::size_t i = 0; i < fy.size(); ++i) fyd[i] = fy[i] == 1 ? 1.0 : -1.0;
    const FeatureMatrix hx = take_rows(x, ho);
    const auto scores = raw_decision(fx, part.alpha, fyd, part.bias, cfg.gamma, hx);
    for (std::size_t i = 0; i < ho.size(); ++i) {
      cal_scores.push_back(scores[i]);
      cal_labels.push_back(y01[ho[i]]);
    }
  }

  if (!feasible || cal_scores.empty()) {
    m.platt_in_sample = true;
    m.warnings.push_back(
        "calibration folds were infeasible; fitting the sigmoid in-sample");
    cal_scores = decision_values(m, x);
    cal_labels = y01;
  }
  const auto [pa, pb] = fit_platt(cal_scores, cal_labels);
  m.platt_a = pa;
  m.platt_b = pb;
  return m;
}

std::vector<double> decision_values(const SvmModel& m, const FeatureMatrix& x) {
  if (x.names != m.feature_names)
    throw validation_error("feature columns do not match the trained model");
  const std::size_t d = m.feature_names.size();
  std::vector<double> out(x.rows, m.bias);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* qr = x.row(r);
    double acc = 0.0;
    for (std::size_t i = 0; i < m.n_sv(); ++i) {
      const double* sv = m.support.data() + i * d;
      double d2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = sv[c] - qr[c];
        d2 += diff * diff;
      }
      acc += m.coef[i] * std::exp(-m.config.gamma * d2);
    }
    out[r] += acc;
  }
  return out;
}

std::vector<double> predict_proba(const SvmModel& m, const FeatureMatrix& x) {
  std::vector<double> out = decision_values(m, x);
  for (double& f : out) {
    const double z = m.platt_a * f + m.platt_b;
    f = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  }
  return out;
}

}  // namespace notewatch::svm
