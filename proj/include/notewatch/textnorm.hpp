#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace notewatch::textnorm {

struct NormalizationResources {
  std::unordered_set<std::string> stopwords;  // lowercase, diacritic-free
};

// Loads the stopword resource file (one entry per line, UTF-8, '#' comments).
// Entries are folded and lowercased on load so the set invariant holds even
// if the file carries accents.
NormalizationResources load_resources(const std::string& stopwords_path);

struct TokenDoc {
  std::string doc_id;
  std::vector<std::string> tokens;
};

// Maps letters with diacritics (Latin-1 Supplement through Latin Extended-B
// additions, U+00C0..U+024F) to their base letter; all other characters pass
// through unchanged. Input and output are UTF-8.
std::string fold_diacritics(const std::string& text);

// Snowball Dutch stemming algorithm. Expects a lowercase token; tokens from
// normalize() are additionally diacritic-free, but the accent-removal step of
// the published algorithm is applied here as well so the function matches the
// reference on raw lowercase input.
std::string stem(const std::string& token);

// Full pipeline, applied in this fixed order: lowercase, diacritic folding,
// non-alphanumeric removal (replaced by space), whitespace tokenization,
// stopword removal, stemming, removal of "." tokens. The final step is a
// no-op after non-alphanumeric removal and is kept as an explicit filter.
std::vector<std::string> normalize(const std::string& text,
                                   const NormalizationResources& resources);

// Line-delimited TokenDoc I/O ({"doc_id": ..., "tokens": [...]}).
void write_token_docs(const std::string& path, const std::vector<TokenDoc>& docs);
std::vector<TokenDoc> read_token_docs(const std::string& path);

}  // namespace notewatch::textnorm
