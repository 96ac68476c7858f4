#include "notewatch/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "notewatch/common.hpp"
#include "notewatch/rng.hpp"

namespace notewatch::embeddings {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void validate(const ParagraphVectorConfig& cfg) {
  if (cfg.vector_size < 1) throw validation_error("vector_size must be at least 1");
  if (cfg.window < 1) throw validation_error("window must be at least 1");
  if (cfg.epochs < 1) throw validation_error("epochs must be at least 1");
  if (cfg.negative_samples < 0) throw validation_error("negative_samples must be non-negative");
  if (!(cfg.final_lr > 0.0) || !(cfg.final_lr <= cfg.initial_lr))
    throw validation_error("need 0 < final_lr <= initial_lr");
}

std::vector<double> build_neg_table(const Vocabulary& vocab) {
  std::vector<double> cum(vocab.size());
  double total = 0.0;
  for (int w = 0; w < vocab.size(); ++w) {
    total += std::pow(static_cast<double>(vocab.corpus_freq[w]), 0.75);
    cum[w] = total;
  }
  return cum;
}

int draw_negative(const std::vector<double>& cum, int center, Rng& rng) {
  // redraw on hitting the center; a single-word vocabulary has no negatives
  if (cum.size() < 2) return -1;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double u = rng.uniform01() * cum.back();
    const int w = static_cast<int>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    const int clamped = std::min(w, static_cast<int>(cum.size()) - 1);
    if (clamped != center) return clamped;
  }
  return -1;
}

void check_finite(const std::vector<double>& a, const char* what) {
  for (double x : a)
    if (!std::isfinite(x))
      throw runtime_failure(std::string("non-finite value in ") + what);
}

}  // namespace

double pv_step_gradients(const double* doc_vec, const double* const* ctx,
                         int n_ctx, const double* u_center,
                         const double* const* u_negs, int n_neg, int dim,
                         double* g_shared, double* g_center, double* g_negs) {
  const double inv = 1.0 / (1.0 + n_ctx);
  std::vector<double> h(dim);
  for (int i = 0; i < dim; ++i) h[i] = doc_vec[i];
  for (int c = 0; c < n_ctx; ++c)
    for (int i = 0; i < dim; ++i) h[i] += ctx[c][i];
  for (int i = 0; i < dim; ++i) h[i] *= inv;

  std::vector<double> grad_h(dim, 0.0);
  double loss = 0.0;

  double a = 0.0;
  for (int i = 0; i < dim; ++i) a += u_center[i] * h[i];
  loss += softplus(-a);
  const double gc = sigmoid(a) - 1.0;
  for (int i = 0; i < dim; ++i) {
    g_center[i] = gc * h[i];
    grad_h[i] += gc * u_center[i];
  }

  for (int j = 0; j < n_neg; ++j) {
    double aj = 0.0;
    for (int i = 0; i < dim; ++i) aj += u_negs[j][i] * h[i];
    loss += softplus(aj);
    const double gj = sigmoid(aj);
    double* gn = g_negs + static_cast<std::size_t>(j) * dim;
    for (int i = 0; i < dim; ++i) {
      gn[i] = gj * h[i];
      grad_h[i] += gj * u_negs[j][i];
    }
  }

  for (int i = 0; i < dim; ++i) g_shared[i] = grad_h[i] * inv;
  return loss;
}

ParagraphVectorModel train_pv(const std::vector<textnorm::TokenDoc>& docs,
                              const ParagraphVectorConfig& cfg,
                              std::size_t min_doc_len) {
  validate(cfg);
  const int D = cfg.vector_size;

  ParagraphVectorModel m;
  m.config = cfg;
  m.vocab = vocab::build_vocab(docs, cfg.min_count, min_doc_len);
  const int V = m.vocab.size();

  std::vector<std::vector<int>> seq;  // in-vocab token ids per eligible doc
  for (const auto& doc : docs) {
    if (doc.tokens.size() < min_doc_len) continue;
    std::vector<int> ids;
    for (const auto& t : doc.tokens) {
      const int id = m.vocab.id_of(t);
      if (id >= 0) ids.push_back(id);
    }
    m.doc_index.emplace(doc.doc_id, static_cast<int>(m.doc_ids.size()));
    m.doc_ids.push_back(doc.doc_id);
    seq.push_back(std::move(ids));
  }
  const std::size_t N = seq.size();
  if (N == 0) throw validation_error("no documents meet the length threshold");

  std::size_t positions = 0;
  for (const auto& s : seq) positions += s.size();
  if (positions == 0)
    throw validation_error("no in-vocabulary tokens in eligible documents");
  const std::size_t total_steps = positions * static_cast<std::size_t>(cfg.epochs);

  m.neg_cum = build_neg_table(m.vocab);

  Rng rng(cfg.seed);
  m.word_in.resize(static_cast<std::size_t>(V) * D);
  for (auto& x : m.word_in) x = (rng.uniform01() - 0.5) / D;
  m.doc_vecs.resize(N * static_cast<std::size_t>(D));
  for (auto& x : m.doc_vecs) x = (rng.uniform01() - 0.5) / D;
  m.word_out.assign(static_cast<std::size_t>(V) * D, 0.0);

  const int max_neg = cfg.negative_samples;
  std::vector<double> g_shared(D), g_center(D);
  std::vector<double> g_negs(static_cast<std::size_t>(std::max(1, max_neg)) * D);
  std::vector<const double*> ctx_ptrs;
  std::vector<const double*> neg_ptrs;
  std::vector<int> ctx_ids, neg_ids;
  const double lr_span = cfg.final_lr - cfg.initial_lr;
  const double step_div = static_cast<double>(std::max<std::size_t>(1, total_steps - 1));

  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const auto& s = seq[n];
      double* dvec = m.doc_vecs.data() + n * static_cast<std::size_t>(D);
      for (std::size_t t = 0; t < s.size(); ++t) {
        const double lr = cfg.initial_lr + lr_span * (static_cast<double>(step) / step_div);
        const int center = s[t];

        ctx_ids.clear();
        ctx_ptrs.clear();
        const std::size_t lo = t >= static_cast<std::size_t>(cfg.window) ? t - cfg.window : 0;
        const std::size_t hi = std::min(s.size() - 1, t + cfg.window);
        for (std::size_t p = lo; p <= hi; ++p) {
          if (p == t) continue;
          ctx_ids.push_back(s[p]);
          ctx_ptrs.push_back(m.word_in.data() + static_cast<std::size_t>(s[p]) * D);
        }

        neg_ids.clear();
        neg_ptrs.clear();
        for (int j = 0; j < max_neg; ++j) {
          const int w = draw_negative(m.neg_cum, center, rng);
          if (w < 0) break;
          neg_ids.push_back(w);
          neg_ptrs.push_back(m.word_out.data() + static_cast<std::size_t>(w) * D);
        }

        loss_sum += pv_step_gradients(
            dvec, ctx_ptrs.data(), static_cast<int>(ctx_ptrs.size()),
            m.word_out.data() + static_cast<std::size_t>(center) * D,
            neg_ptrs.data(), static_cast<int>(neg_ids.size()), D,
            g_shared.data(), g_center.data(), g_negs.data());

        for (int i = 0; i < D; ++i) dvec[i] -= lr * g_shared[i];
        for (int c = 0; c < static_cast<int>(ctx_ids.size()); ++c) {
          double* row = m.word_in.data() + static_cast<std::size_t>(ctx_ids[c]) * D;
          for (int i = 0; i < D; ++i) row[i] -= lr * g_shared[i];
        }
        double* uc = m.word_out.data() + static_cast<std::size_t>(center) * D;
        for (int i = 0; i < D; ++i) uc[i] -= lr * g_center[i];
        for (int j = 0; j < static_cast<int>(neg_ids.size()); ++j) {
          double* un = m.word_out.data() + static_cast<std::size_t>(neg_ids[j]) * D;
          const double* gn = g_negs.data() + static_cast<std::size_t>(j) * D;
          for (int i = 0; i < D; ++i) un[i] -= lr * gn[i];
        }

        m.last_step_lr = lr;
        ++step;
      }
    }
    m.loss_trace.push_back(loss_sum / static_cast<double>(positions));
    check_finite(m.word_in, "word input vectors");
    check_finite(m.word_out, "word output vectors");
    check_finite(m.doc_vecs, "doc vectors");
  }
  return m;
}

InferredVector infer_vector(const ParagraphVectorModel& model,
                            const std::vector<std::string>& tokens, int epochs,
                            std::uint64_t seed) {
  const int D = model.config.vector_size;
  InferredVector out;
  out.values.assign(D, 0.0);

  std::vector<int> s;
  for (const auto& t : tokens) {
    const int id = model.vocab.id_of(t);
    if (id >= 0) s.push_back(id);
  }
  if (s.empty()) {
    out.oov_fallback = true;
    return out;
  }

  const int E = epochs > 0 ? epochs : model.config.epochs;
  const ParagraphVectorConfig& cfg = model.config;
  Rng rng(seed);
  std::vector<double> dvec(D);
  for (auto& x : dvec) x = (rng.uniform01() - 0.5) / D;

  const std::size_t total_steps = s.size() * static_cast<std::size_t>(E);
  const double lr_span = cfg.final_lr - cfg.initial_lr;
  const double step_div = static_cast<double>(std::max<std::size_t>(1, total_steps - 1));

  std::vector<double> g_shared(D), g_center(D);
  std::vector<double> g_negs(static_cast<std::size_t>(std::max(1, cfg.negative_samples)) * D);
  std::vector<const double*> ctx_ptrs, neg_ptrs;

  std::size_t step = 0;
  for (int epoch = 0; epoch < E; ++epoch) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double lr = cfg.initial_lr + lr_span * (static_cast<double>(step) / step_div);
      const int center = s[t];

      ctx_ptrs.clear();
      const std::size_t lo = t >= static_cast<std::size_t>(cfg.window) ? t - cfg.window : 0;
      const std::size_t hi = std::min(s.size() - 1, t + cfg.window);
      for (std::size_t p = lo; p <= hi; ++p) {
        if (p == t) continue;
        ctx_ptrs.push_back(model.word_in_row(s[p]));
      }

      int n_neg = 0;
      neg_ptrs.clear();
      for (int j = 0; j < cfg.negative_samples; ++j) {
        const int w = draw_negative(model.neg_cum, center, rng);
        if (w < 0) break;
        neg_ptrs.push_back(model.word_out_row(w));
        ++n_neg;
      }

      pv_step_gradients(dvec.data(), ctx_ptrs.data(),
                        static_cast<int>(ctx_ptrs.size()),
                        model.word_out_row(center), neg_ptrs.data(), n_neg, D,
                        g_shared.data(), g_center.data(), g_negs.data());
      for (int i = 0; i < D; ++i) dvec[i] -= lr * g_shared[i];
      ++step;
    }
  }
  out.values = std::move(dvec);
  return out;
}

GradientCheckReport gradient_check(const ParagraphVectorConfig& cfg,
                                   int samples, std::uint64_t seed) {
  constexpr int V = 10;
  constexpr int D = 4;
  const int n_neg = std::min(cfg.negative_samples, V - 1);
  const int n_ctx = std::min(cfg.window * 2, V - 1);

  Rng rng(seed);
  // one scenario: doc vector, n_ctx context rows, center output row,
  // n_neg distinct negative output rows, all random
  std::vector<double> doc(D), center_u(D);
  std::vector<std::vector<double>> ctx(n_ctx, std::vector<double>(D));
  std::vector<std::vector<double>> negs(n_neg, std::vector<double>(D));
  auto fill = [&](std::vector<double>& v) {
    for (auto& x : v) x = rng.normal() * 0.5;
  };
  fill(doc);
  fill(center_u);
  for (auto& c : ctx) fill(c);
  for (auto& u : negs) fill(u);

  auto loss_of = [&]() {
    std::vector<const double*> cp, np;
    for (const auto& c : ctx) cp.push_back(c.data());
    for (const auto& u : negs) np.push_back(u.data());
    std::vector<double> gs(D), gc(D), gn(static_cast<std::size_t>(std::max(1, n_neg)) * D);
    return pv_step_gradients(doc.data(), cp.data(), n_ctx, center_u.data(),
                             np.data(), n_neg, D, gs.data(), gc.data(), gn.data());
  };

  // analytic gradients at the base point
  std::vector<double> g_shared(D), g_center(D);
  std::vector<double> g_negs(static_cast<std::size_t>(std::max(1, n_neg)) * D);
  {
    std::vector<const double*> cp, np;
    for (const auto& c : ctx) cp.push_back(c.data());
    for (const auto& u : negs) np.push_back(u.data());
    pv_step_gradients(doc.data(), cp.data(), n_ctx, center_u.data(), np.data(),
                      n_neg, D, g_shared.data(), g_center.data(), g_negs.data());
  }

  struct Param {
    double* slot;
    double analytic;
    std::string name;
  };
  std::vector<Param> params;
  for (int i = 0; i < D; ++i)
    params.push_back({&doc[i], g_shared[i], "doc[" + std::to_string(i) + "]"});
  for (int c = 0; c < n_ctx; ++c)
    for (int i = 0; i < D; ++i)
      params.push_back({&ctx[c][i], g_shared[i],
                        "ctx" + std::to_string(c) + "[" + std::to_string(i) + "]"});
  for (int i = 0; i < D; ++i)
    params.push_back({&center_u[i], g_center[i], "center[" + std::to_string(i) + "]"});
  for (int j = 0; j < n_neg; ++j)
    for (int i = 0; i < D; ++i)
      params.push_back({&negs[j][i], g_negs[static_cast<std::size_t>(j) * D + i],
                        "neg" + std::to_string(j) + "[" + std::to_string(i) + "]"});

  GradientCheckReport report;
  const double h = 1e-6;
  for (int sampled = 0; sampled < samples; ++sampled) {
    Param& p = params[static_cast<std::size_t>(rng.uniform_int(params.size()))];
    const double saved = *p.slot;
    *p.slot = saved + h;
    const double up = loss_of();
    *p.slot = saved - h;
    const double down = loss_of();
    *p.slot = saved;
    const double numeric = (up - down) / (2 * h);
    const double rel = std::abs(p.analytic - numeric) /
                       std::max(1e-8, std::abs(p.analytic) + std::abs(numeric));
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_param = p.name;
    }
    ++report.checked;
  }
  report.passed = report.max_rel_err < 1e-4;
  return report;
}

}  // namespace notewatch::embeddings
