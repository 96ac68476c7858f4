#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "notewatch/vocab.hpp"

namespace notewatch::topics {

using vocab::BowDoc;
using vocab::Vocabulary;

struct LdaConfig {
  int topics = 25;
  double alpha = -1.0;  // <= 0 selects the default 5.0 / topics
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 0;
  int ll_every = 1;             // record log likelihood every N iterations
  bool check_invariants = false;  // verify count consistency each sweep
};

struct TopicModel {
  int K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  Vocabulary vocab;
  std::vector<double> phi;  // K x V row-major; rows sum to 1
  std::vector<std::pair<int, double>> ll_trace;  // (iteration, joint log lik)

  double phi_at(int k, int w) const { return phi[static_cast<std::size_t>(k) * vocab.size() + w]; }
  const double* phi_row(int k) const { return phi.data() + static_cast<std::size_t>(k) * vocab.size(); }
};

struct TopicVector {
  std::string doc_id;
  std::vector<double> weights;  // length K, sums to 1
  bool oov_fallback = false;    // no in-vocabulary tokens: uniform weights
};

// Unnormalized collapsed-sampler conditional for one token:
//   out[k] = (n_dk[k] + alpha) * (n_wk[k] + beta) / (n_k[k] + V * beta)
// where the counts exclude the token being resampled. The training sampler
// calls exactly this function, so tests compare it to direct computation.
void gibbs_conditional(const long* n_dk, const long* n_wk, const long* n_k,
                       int K, std::size_t vocab_size, double alpha, double beta,
                       double* out);

// Collapsed Gibbs sampling over token-topic assignments; deterministic for
// a given seed. Fatal when the corpus is empty or has fewer tokens than
// topics.
TopicModel train_lda(const std::vector<BowDoc>& docs, const Vocabulary& vocab,
                     const LdaConfig& cfg);

// Sampling with phi held fixed; weights are the smoothed mean topic
// assignment proportions over the post-burn-in iterations. A document with
// zero in-vocabulary tokens yields uniform weights with oov_fallback set.
TopicVector infer_topics(const TopicModel& model, const BowDoc& doc,
                         int iterations = 100, int burn_in = 20,
                         std::uint64_t seed = 0);

// Top terms of one topic: phi descending, ties broken toward the lower id.
std::vector<int> top_terms(const TopicModel& model, int k, int top_n);

struct CoherenceScore {
  std::vector<double> per_topic;
  double mean = 0.0;
  int top_n = 0;
};

// Sliding-window co-occurrence coherence. Boolean windows of window_size
// tokens (step 1; a doc shorter than the window forms one whole-doc
// window) give term probabilities; each pair of a topic's top terms gets
// an NPMI value; a term's NPMI row vector over the topic's top terms
// (diagonal fixed at 1) is compared to the others by cosine; the topic
// score is the mean over term pairs and the total is the mean over topics.
// Terms never seen in the reference corpus contribute NPMI -1. A topic
// with a single top term scores 1 by convention.
CoherenceScore coherence_cv(const TopicModel& model,
                            const std::vector<textnorm::TokenDoc>& reference_docs,
                            int top_n = 10, int window_size = 110);

struct TopicCountSelection {
  int best_k = 0;
  std::vector<std::pair<int, double>> scores;  // (K, mean coherence), K ascending
};

// Trains one model per candidate K (parallel across candidates when jobs
// allows; per-K seed substreams keep results identical either way) and
// returns the K with the highest mean coherence, ties toward smaller K.
TopicCountSelection select_topic_count(const std::vector<BowDoc>& docs,
                                       const Vocabulary& vocab,
                                       const std::vector<textnorm::TokenDoc>& reference_docs,
                                       const std::vector<int>& candidate_ks,
                                       const LdaConfig& cfg, int jobs = 1,
                                       int top_n = 10, int window_size = 110);

}  // namespace notewatch::topics
