#include "notewatch/vocab.hpp"

#include <algorithm>
#include <map>

#include "notewatch/common.hpp"

namespace notewatch::vocab {

Vocabulary build_vocab(const std::vector<textnorm::TokenDoc>& docs,
                       long min_count, std::size_t min_doc_len) {
  // std::map keeps terms lexicographically ordered for id assignment
  std::map<std::string, std::pair<long, long>> counts;  // term -> (corpus, doc)
  for (const auto& doc : docs) {
    if (doc.tokens.size() < min_doc_len) continue;
    for (const auto& tok : doc.tokens) ++counts[tok].first;
    // second pass per doc for doc_freq (distinct terms)
    std::vector<std::string> distinct(doc.tokens);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (const auto& t : distinct) ++counts[t].second;
  }

  Vocabulary v;
  for (const auto& [term, c] : counts) {
    if (c.first < min_count) continue;
    v.ids.emplace(term, static_cast<int>(v.terms.size()));
    v.terms.push_back(term);
    v.corpus_freq.push_back(c.first);
    v.doc_freq.push_back(c.second);
  }
  if (v.terms.empty())
    throw validation_error("vocabulary is empty after frequency filtering");
  return v;
}

BowDoc to_bow(const textnorm::TokenDoc& doc, const Vocabulary& v) {
  std::map<int, long> acc;
  for (const auto& tok : doc.tokens) {
    const int id = v.id_of(tok);
    if (id >= 0) ++acc[id];
  }
  BowDoc out;
  out.doc_id = doc.doc_id;
  out.counts.reserve(acc.size());
  for (const auto& [id, c] : acc) {
    out.counts.emplace_back(id, c);
    out.total += c;
  }
  return out;
}

std::vector<BowDoc> training_bow(const std::vector<textnorm::TokenDoc>& docs,
                                 const Vocabulary& v, std::size_t min_doc_len) {
  std::vector<BowDoc> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    if (doc.tokens.size() < min_doc_len) continue;
    out.push_back(to_bow(doc, v));
  }
  return out;
}

}  // namespace notewatch::vocab
