#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "notewatch/textnorm.hpp"

namespace notewatch::vocab {

// Term table shared by the topic and embedding models. Ids are dense
// 0..V-1, assigned in lexicographic term order so they do not depend on
// document order.
struct Vocabulary {
  std::vector<std::string> terms;            // id -> term
  std::unordered_map<std::string, int> ids;  // term -> id
  std::vector<long> corpus_freq;             // id -> total occurrences
  std::vector<long> doc_freq;                // id -> containing docs

  int size() const { return static_cast<int>(terms.size()); }
  // -1 when the term is out of vocabulary.
  int id_of(const std::string& term) const {
    const auto it = ids.find(term);
    return it == ids.end() ? -1 : it->second;
  }
};

// Counts over docs with at least min_doc_len tokens; terms with corpus
// frequency below min_count are excluded. Empty result is fatal.
Vocabulary build_vocab(const std::vector<textnorm::TokenDoc>& docs,
                       long min_count = 20, std::size_t min_doc_len = 10);

struct BowDoc {
  std::string doc_id;
  std::vector<std::pair<int, long>> counts;  // (term_id, count), id ascending
  long total = 0;                            // sum of counts
};

// Out-of-vocabulary tokens are dropped.
BowDoc to_bow(const textnorm::TokenDoc& doc, const Vocabulary& v);

// Bag-of-words corpus for model training: only docs with at least
// min_doc_len tokens (measured before vocabulary filtering) qualify.
std::vector<BowDoc> training_bow(const std::vector<textnorm::TokenDoc>& docs,
                                 const Vocabulary& v, std::size_t min_doc_len = 10);

}  // namespace notewatch::vocab
