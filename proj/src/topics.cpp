#include "notewatch/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "notewatch/common.hpp"
#include "notewatch/parallel.hpp"
#include "notewatch/rng.hpp"

namespace notewatch::topics {

void gibbs_conditional(const long* n_dk, const long* n_wk, const long* n_k,
                       int K, std::size_t vocab_size, double alpha, double beta,
                       double* out) {
  const double vbeta = static_cast<double>(vocab_size) * beta;
  for (int k = 0; k < K; ++k) {
    out[k] = (static_cast<double>(n_dk[k]) + alpha) *
             (static_cast<double>(n_wk[k]) + beta) /
             (static_cast<double>(n_k[k]) + vbeta);
  }
}

namespace {

struct TokenCorpus {
  std::vector<int> words;        // flattened token stream
  std::vector<std::size_t> doc_begin;  // D+1 offsets into words
};

TokenCorpus flatten(const std::vector<BowDoc>& docs) {
  TokenCorpus tc;
  tc.doc_begin.reserve(docs.size() + 1);
  tc.doc_begin.push_back(0);
  for (const auto& d : docs) {
    for (const auto& [w, c] : d.counts)
      for (long i = 0; i < c; ++i) tc.words.push_back(w);
    tc.doc_begin.push_back(tc.words.size());
  }
  return tc;
}

// Joint log p(w, z) under the symmetric-prior collapsed model; zero-count
// cells cancel against the prior normalizer so only nonzeros are visited.
double joint_log_likelihood(const std::vector<long>& n_dk, const std::vector<long>& n_wk,
                            const std::vector<long>& n_k, std::size_t D, std::size_t V,
                            int K, double alpha, double beta,
                            const std::vector<long>& doc_len) {
  double ll = 0.0;
  const double vbeta = static_cast<double>(V) * beta;
  const double kalpha = static_cast<double>(K) * alpha;
  const double lg_beta = std::lgamma(beta);
  const double lg_alpha = std::lgamma(alpha);
  for (int k = 0; k < K; ++k) {
    ll += std::lgamma(vbeta) - std::lgamma(static_cast<double>(n_k[k]) + vbeta);
  }
  for (std::size_t w = 0; w < V; ++w) {
    const long* row = n_wk.data() + w * static_cast<std::size_t>(K);
    for (int k = 0; k < K; ++k)
      if (row[k] > 0) ll += std::lgamma(static_cast<double>(row[k]) + beta) - lg_beta;
  }
  for (std::size_t d = 0; d < D; ++d) {
    ll += std::lgamma(kalpha) - std::lgamma(static_cast<double>(doc_len[d]) + kalpha);
    const long* row = n_dk.data() + d * static_cast<std::size_t>(K);
    for (int k = 0; k < K; ++k)
      if (row[k] > 0) ll += std::lgamma(static_cast<double>(row[k]) + alpha) - lg_alpha;
  }
  return ll;
}

int sample_from(const double* weights, int K, Rng& rng) {
  double total = 0.0;
  for (int k = 0; k < K; ++k) total += weights[k];
  const double u = rng.uniform01() * total;
  double cum = 0.0;
  for (int k = 0; k < K; ++k) {
    cum += weights[k];
    if (u < cum) return k;
  }
  return K - 1;
}

}  // namespace

TopicModel train_lda(const std::vector<BowDoc>& docs, const Vocabulary& vocab,
                     const LdaConfig& cfg) {
  const int K = cfg.topics;
  if (K < 1) throw validation_error("topic count must be at least 1");
  if (cfg.iterations < 1) throw validation_error("iterations must be at least 1");
  if (cfg.ll_every < 1) throw validation_error("ll_every must be at least 1");
  if (docs.empty()) throw validation_error("topic training corpus is empty");
  const std::size_t V = static_cast<std::size_t>(vocab.size());

  TokenCorpus tc = flatten(docs);
  const std::size_t N = tc.words.size();
  const std::size_t D = docs.size();
  if (N == 0) throw validation_error("topic training corpus has no in-vocabulary tokens");
  if (static_cast<std::size_t>(K) > N)
    throw validation_error("more topics than tokens in the corpus");

  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 5.0 / K;
  const double beta = cfg.beta;

  std::vector<long> n_dk(D * K, 0), n_wk(V * K, 0), n_k(K, 0), doc_len(D, 0);
  std::vector<int> z(N);
  std::vector<long> corpus_freq(V, 0);

  Rng rng(cfg.seed);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t i = tc.doc_begin[d]; i < tc.doc_begin[d + 1]; ++i) {
      const int w = tc.words[i];
      const int k = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(K)));
      z[i] = k;
      ++n_dk[d * K + k];
      ++n_wk[static_cast<std::size_t>(w) * K + k];
      ++n_k[k];
      ++doc_len[d];
      ++corpus_freq[w];
    }
  }

  TopicModel model;
  model.K = K;
  model.alpha = alpha;
  model.beta = beta;
  model.vocab = vocab;

  std::vector<double> cond(K);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t d = 0; d < D; ++d) {
      long* dk = n_dk.data() + d * static_cast<std::size_t>(K);
      for (std::size_t i = tc.doc_begin[d]; i < tc.doc_begin[d + 1]; ++i) {
        const int w = tc.words[i];
        long* wk = n_wk.data() + static_cast<std::size_t>(w) * K;
        const int old = z[i];
        --dk[old];
        --wk[old];
        --n_k[old];
        gibbs_conditional(dk, wk, n_k.data(), K, V, alpha, beta, cond.data());
        const int k = sample_from(cond.data(), K, rng);
        z[i] = k;
        ++dk[k];
        ++wk[k];
        ++n_k[k];
      }
    }
    if (it % cfg.ll_every == 0 || it == cfg.iterations - 1) {
      model.ll_trace.emplace_back(
          it, joint_log_likelihood(n_dk, n_wk, n_k, D, V, K, alpha, beta, doc_len));
    }
    if (cfg.check_invariants) {
      for (std::size_t w = 0; w < V; ++w) {
        long s = 0;
        for (int k = 0; k < K; ++k) s += n_wk[w * K + k];
        if (s != corpus_freq[w])
          throw runtime_failure("topic-term count drift for term id " + std::to_string(w));
      }
    }
  }

  model.phi.resize(static_cast<std::size_t>(K) * V);
  const double vbeta = static_cast<double>(V) * beta;
  for (int k = 0; k < K; ++k) {
    const double denom = static_cast<double>(n_k[k]) + vbeta;
    for (std::size_t w = 0; w < V; ++w)
      model.phi[static_cast<std::size_t>(k) * V + w] =
          (static_cast<double>(n_wk[w * K + k]) + beta) / denom;
  }
  return model;
}

TopicVector infer_topics(const TopicModel& model, const BowDoc& doc,
                         int iterations, int burn_in, std::uint64_t seed) {
  const int K = model.K;
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations)
    throw validation_error("inference needs 0 <= burn_in < iterations");

  TopicVector out;
  out.doc_id = doc.doc_id;
  out.weights.assign(K, 0.0);

  std::vector<int> words;
  for (const auto& [w, c] : doc.counts)
    for (long i = 0; i < c; ++i) words.push_back(w);
  const std::size_t n = words.size();
  if (n == 0) {
    out.oov_fallback = true;
    std::fill(out.weights.begin(), out.weights.end(), 1.0 / K);
    return out;
  }

  Rng rng(seed);
  std::vector<long> n_k(K, 0);
  std::vector<int> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(K)));
    z[i] = k;
    ++n_k[k];
  }

  std::vector<double> cond(K);
  std::vector<long> acc(K, 0);
  int recorded = 0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const int w = words[i];
      --n_k[z[i]];
      for (int k = 0; k < K; ++k)
        cond[k] = (static_cast<double>(n_k[k]) + model.alpha) * model.phi_at(k, w);
      const int k = sample_from(cond.data(), K, rng);
      z[i] = k;
      ++n_k[k];
    }
    if (it >= burn_in) {
      for (int k = 0; k < K; ++k) acc[k] += n_k[k];
      ++recorded;
    }
  }

  const double denom = static_cast<double>(n) + K * model.alpha;
  for (int k = 0; k < K; ++k) {
    const double mean_count = static_cast<double>(acc[k]) / recorded;
    out.weights[k] = (mean_count + model.alpha) / denom;
  }
  return out;
}

std::vector<int> top_terms(const TopicModel& model, int k, int top_n) {
  const int V = model.vocab.size();
  std::vector<int> ids(V);
  std::iota(ids.begin(), ids.end(), 0);
  const int n = std::min(top_n, V);
  std::partial_sort(ids.begin(), ids.begin() + n, ids.end(), [&](int a, int b) {
    const double pa = model.phi_at(k, a), pb = model.phi_at(k, b);
    if (pa != pb) return pa > pb;
    return a < b;
  });
  ids.resize(n);
  return ids;
}

namespace {

constexpr double kNpmiEps = 1e-12;

struct WindowCounts {
  long n_windows = 0;
  std::vector<long> term;        // per compact index
  std::vector<long> pair;        // M x M, upper triangle used
  int m = 0;

  long& pair_at(int a, int b) { return pair[static_cast<std::size_t>(std::min(a, b)) * m + std::max(a, b)]; }
  long pair_get(int a, int b) const {
    return pair[static_cast<std::size_t>(std::min(a, b)) * m + std::max(a, b)];
  }
};

// Boolean sliding windows (step 1; short docs give one whole-doc window).
WindowCounts count_windows(const std::vector<textnorm::TokenDoc>& docs,
                           const std::unordered_map<std::string, int>& index,
                           int m, int window_size) {
  WindowCounts wc;
  wc.m = m;
  wc.term.assign(m, 0);
  wc.pair.assign(static_cast<std::size_t>(m) * m, 0);

  std::vector<long> cnt(m, 0);
  std::vector<int> active;
  std::vector<int> rel;  // per position: compact index or -1

  auto add = [&](int idx) {
    if (idx < 0) return;
    if (cnt[idx]++ == 0) active.push_back(idx);
  };
  auto remove = [&](int idx) {
    if (idx < 0) return;
    if (--cnt[idx] == 0) {
      const auto it = std::find(active.begin(), active.end(), idx);
      *it = active.back();
      active.pop_back();
    }
  };
  auto record = [&]() {
    ++wc.n_windows;
    for (std::size_t a = 0; a < active.size(); ++a) {
      ++wc.term[active[a]];
      for (std::size_t b = a + 1; b < active.size(); ++b)
        ++wc.pair_at(active[a], active[b]);
    }
  };

  for (const auto& doc : docs) {
    const std::size_t len = doc.tokens.size();
    if (len == 0) continue;
    rel.clear();
    rel.reserve(len);
    for (const auto& tok : doc.tokens) {
      const auto it = index.find(tok);
      rel.push_back(it == index.end() ? -1 : it->second);
    }
    std::fill(cnt.begin(), cnt.end(), 0);
    active.clear();

    const std::size_t w = static_cast<std::size_t>(window_size);
    if (len <= w) {
      for (std::size_t i = 0; i < len; ++i) add(rel[i]);
      record();
    } else {
      for (std::size_t i = 0; i < w; ++i) add(rel[i]);
      record();
      for (std::size_t s = 1; s + w <= len; ++s) {
        remove(rel[s - 1]);
        add(rel[s + w - 1]);
        record();
      }
    }
  }
  return wc;
}

double npmi(long n_i, long n_j, long n_ij, long n_windows) {
  if (n_i == 0 || n_j == 0) return -1.0;
  const double pi = static_cast<double>(n_i) / n_windows;
  const double pj = static_cast<double>(n_j) / n_windows;
  const double pij = static_cast<double>(n_ij) / n_windows;
  if (pij >= 1.0) return 1.0;
  return std::log((pij + kNpmiEps) / (pi * pj)) / (-std::log(pij + kNpmiEps));
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

CoherenceScore coherence_cv(const TopicModel& model,
                            const std::vector<textnorm::TokenDoc>& reference_docs,
                            int top_n, int window_size) {
  if (top_n < 1) throw validation_error("coherence needs top_n >= 1");
  if (window_size < 1) throw validation_error("coherence needs window_size >= 1");

  std::vector<std::vector<int>> topic_terms(model.K);
  std::unordered_map<std::string, int> index;  // term string -> compact idx
  for (int k = 0; k < model.K; ++k) {
    topic_terms[k] = top_terms(model, k, top_n);
    for (int id : topic_terms[k]) {
      const auto& term = model.vocab.terms[id];
      index.emplace(term, static_cast<int>(index.size()));
    }
  }
  const int m = static_cast<int>(index.size());

  const WindowCounts wc = count_windows(reference_docs, index, m, window_size);

  CoherenceScore score;
  score.top_n = top_n;
  score.per_topic.reserve(model.K);
  for (int k = 0; k < model.K; ++k) {
    const auto& ids = topic_terms[k];
    const int n = static_cast<int>(ids.size());
    std::vector<int> ci(n);
    for (int i = 0; i < n; ++i) ci[i] = index.at(model.vocab.terms[ids[i]]);

    // NPMI row vectors over this topic's top terms, diagonal pinned to 1
    std::vector<std::vector<double>> vec(n, std::vector<double>(n, 1.0));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double x = npmi(wc.term[ci[i]], wc.term[ci[j]],
                              wc.pair_get(ci[i], ci[j]), wc.n_windows);
        vec[i][j] = x;
        vec[j][i] = x;
      }

    if (n < 2) {
      score.per_topic.push_back(1.0);
      continue;
    }
    double sum = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        sum += cosine(vec[i], vec[j]);
        ++pairs;
      }
    score.per_topic.push_back(sum / pairs);
  }
  score.mean = std::accumulate(score.per_topic.begin(), score.per_topic.end(), 0.0) /
               score.per_topic.size();
  return score;
}

TopicCountSelection select_topic_count(const std::vector<BowDoc>& docs,
                                       const Vocabulary& vocab,
                                       const std::vector<textnorm::TokenDoc>& reference_docs,
                                       const std::vector<int>& candidate_ks,
                                       const LdaConfig& cfg, int jobs,
                                       int top_n, int window_size) {
  if (candidate_ks.empty()) throw validation_error("no candidate topic counts");
  std::vector<int> ks(candidate_ks);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  std::vector<double> means(ks.size(), 0.0);
  parallel_for(ks.size(), jobs, [&](std::size_t i) {
    LdaConfig c = cfg;
    c.topics = ks[i];
    c.seed = Rng::mix(cfg.seed, static_cast<std::uint64_t>(ks[i]));
    const TopicModel model = train_lda(docs, vocab, c);
    means[i] = coherence_cv(model, reference_docs, top_n, window_size).mean;
  });

  TopicCountSelection sel;
  sel.best_k = ks[0];
  double best = means[0];
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sel.scores.emplace_back(ks[i], means[i]);
    if (means[i] > best) {
      best = means[i];
      sel.best_k = ks[i];
    }
  }
  return sel;
}

}  // namespace notewatch::topics
