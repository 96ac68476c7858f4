#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "notewatch/vocab.hpp"

namespace notewatch::embeddings {

using vocab::Vocabulary;

struct ParagraphVectorConfig {
  int vector_size = 300;
  int window = 2;  // words each side of the center, truncated at doc edges
  long min_count = 20;
  int epochs = 20;
  int negative_samples = 5;
  double initial_lr = 0.025;
  double final_lr = 1e-4;
  std::uint64_t seed = 0;
};

struct ParagraphVectorModel {
  ParagraphVectorConfig config;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;  // row order of doc_vecs
  std::unordered_map<std::string, int> doc_index;
  std::vector<double> word_in;   // V x D input vectors
  std::vector<double> word_out;  // V x D output vectors, zero-initialized
  std::vector<double> doc_vecs;  // N x D
  std::vector<double> neg_cum;   // cumulative unigram^0.75, derived from vocab
  std::vector<double> loss_trace;  // per-epoch mean step loss
  double last_step_lr = 0.0;       // learning rate applied at the final step

  int dim() const { return config.vector_size; }
  const double* word_in_row(int w) const {
    return word_in.data() + static_cast<std::size_t>(w) * config.vector_size;
  }
  const double* word_out_row(int w) const {
    return word_out.data() + static_cast<std::size_t>(w) * config.vector_size;
  }
  const double* doc_row(int n) const {
    return doc_vecs.data() + static_cast<std::size_t>(n) * config.vector_size;
  }
};

// Loss and analytic gradients of one averaged-context negative-sampling
// step: h = (doc + sum ctx) / (1 + n_ctx), loss = -log sigmoid(u_center.h)
// - sum_j log sigmoid(-u_neg_j.h). g_shared receives dloss/ddoc, which
// equals dloss/dctx_i for every context word; g_center and g_negs (n_neg x
// dim row-major) receive the output-vector gradients. The trainer applies
// exactly these gradients scaled by the learning rate, so finite-difference
// checks on this function cover the training update.
double pv_step_gradients(const double* doc_vec, const double* const* ctx,
                         int n_ctx, const double* u_center,
                         const double* const* u_negs, int n_neg, int dim,
                         double* g_shared, double* g_center, double* g_negs);

// Distributed-memory training over docs with at least min_doc_len tokens;
// vocabulary comes from the shared builder with the same thresholds. The
// learning rate decays linearly from initial_lr to final_lr across all
// steps (epochs x in-vocabulary positions). Deterministic given the seed;
// training is single-threaded. Parameters are checked finite after every
// epoch.
ParagraphVectorModel train_pv(const std::vector<textnorm::TokenDoc>& docs,
                              const ParagraphVectorConfig& cfg,
                              std::size_t min_doc_len = 10);

struct InferredVector {
  std::vector<double> values;
  bool oov_fallback = false;  // no in-vocabulary tokens: zero vector
};

// Trains a fresh doc vector against frozen word and output vectors.
// epochs <= 0 uses the training epoch count.
InferredVector infer_vector(const ParagraphVectorModel& model,
                            const std::vector<std::string>& tokens,
                            int epochs = -1, std::uint64_t seed = 0);

struct GradientCheckReport {
  bool passed = false;
  double max_rel_err = 0.0;
  std::string worst_param;  // e.g. "ctx1[3]" on failure or at the max error
  int checked = 0;
};

// Central finite differences on a tiny random model (V=10, D=4) against
// the analytic step gradients; samples parameter coordinates across the
// doc, context, center and negative vectors.
GradientCheckReport gradient_check(const ParagraphVectorConfig& cfg,
                                   int samples = 100, std::uint64_t seed = 1);

}  // namespace notewatch::embeddings
