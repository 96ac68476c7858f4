#include "notewatch/runconfig.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "notewatch/common.hpp"

namespace notewatch::runconfig {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

const std::vector<std::string> kKnownKeys = {
    // input locations
    "data.dir", "data.notes", "data.admissions", "data.incidents", "data.structured",
    "data.dataset", "data.tokens",
    // resources and run-wide settings
    "resources.stopwords", "seed", "jobs", "verbosity",
    // cross-validation pipeline
    "pipeline.representation", "pipeline.classifier", "pipeline.use_structured",
    "pipeline.selection", "pipeline.k_outer", "pipeline.k_inner",
    "pipeline.representation_per_fold", "pipeline.vocab_min_count", "pipeline.min_doc_len",
    // classifier grids
    "forest.n_estimators", "forest.grid_limit", "svm.grid_limit",
    // topic model
    "lda.topics", "lda.alpha", "lda.beta", "lda.iterations", "lda.seed",
    // paragraph vectors
    "pv.vector_size", "pv.window", "pv.min_count", "pv.epochs", "pv.negative_samples",
    "pv.initial_lr", "pv.final_lr", "pv.seed",
    // second run of a comparison
    "compare.representation", "compare.classifier", "compare.use_structured",
    // synthesis
    "synth.scale", "synth.n_patients", "synth.n_periods", "synth.positive_fraction",
    "synth.vocab_size", "synth.n_true_topics", "synth.association", "synth.age_positive_mean",
    "synth.age_positive_sd", "synth.age_negative_mean", "synth.age_negative_sd",
    "synth.words_positive_mean", "synth.words_positive_sd", "synth.words_negative_mean",
    "synth.words_negative_sd", "synth.stopword_rate", "synth.suffix_rate",
    "synth.short_fraction", "synth.doc_alpha"};

bool known(const std::string& key) {
  return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

}  // namespace

const std::vector<std::string>& known_keys() { return kKnownKeys; }

KvMap parse_config_text(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw validation_error("config line " + std::to_string(lineno) + ": empty key");
    if (!known(key))
      throw validation_error("config line " + std::to_string(lineno) + ": unknown key '" + key +
                             "'");
    if (kv.count(key))
      throw validation_error("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                             "'");
    kv[key] = value;
  }
  return kv;
}

KvMap parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string get_string(const KvMap& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw validation_error("config key '" + key + "': expected " + expected + ", got '" + value +
                         "'");
}

}  // namespace

long get_long(const KvMap& kv, const std::string& key, long fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (errno || end != it->second.c_str() + it->second.size() || it->second.empty())
    bad_value(key, it->second, "an integer");
  return v;
}

double get_double(const KvMap& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (errno || end != it->second.c_str() + it->second.size() || it->second.empty())
    bad_value(key, it->second, "a number");
  return v;
}

bool get_bool(const KvMap& kv, const std::string& key, bool fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  bad_value(key, it->second, "true or false");
}

std::uint64_t get_u64(const KvMap& kv, const std::string& key, std::uint64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (errno || end != it->second.c_str() + it->second.size() || it->second.empty() ||
      it->second.front() == '-')
    bad_value(key, it->second, "an unsigned integer");
  return v;
}

namespace {

harness::Representation parse_representation(const KvMap& kv, const std::string& key,
                                             harness::Representation fallback) {
  const std::string v = get_string(kv, key, "");
  if (v.empty()) return fallback;
  if (v == "lda") return harness::Representation::lda;
  if (v == "embeddings") return harness::Representation::embeddings;
  if (v == "both") return harness::Representation::both;
  bad_value(key, v, "lda, embeddings or both");
}

harness::ClassifierKind parse_classifier(const KvMap& kv, const std::string& key,
                                         harness::ClassifierKind fallback) {
  const std::string v = get_string(kv, key, "");
  if (v.empty()) return fallback;
  if (v == "forest") return harness::ClassifierKind::forest;
  if (v == "svm") return harness::ClassifierKind::svm;
  bad_value(key, v, "forest or svm");
}

template <typename Grid>
void apply_grid_limit(Grid& grid, long limit, const char* key) {
  if (limit < 0) throw validation_error(std::string("config key '") + key + "': must be >= 0");
  if (limit > 0 && static_cast<std::size_t>(limit) < grid.size())
    grid.resize(static_cast<std::size_t>(limit));
}

}  // namespace

harness::PipelineConfig pipeline_from(const KvMap& kv, std::uint64_t seed) {
  harness::PipelineConfig pc;
  pc.seed = seed;
  pc.representation = parse_representation(kv, "pipeline.representation", pc.representation);
  pc.classifier = parse_classifier(kv, "pipeline.classifier", pc.classifier);
  pc.use_structured = get_bool(kv, "pipeline.use_structured", pc.use_structured);
  const std::string sel = get_string(kv, "pipeline.selection", "pr_auc");
  if (sel == "pr_auc")
    pc.selection = harness::SelectionMetric::pr_auc;
  else if (sel == "roc_auc")
    pc.selection = harness::SelectionMetric::roc_auc;
  else
    bad_value("pipeline.selection", sel, "pr_auc or roc_auc");
  pc.k_outer = static_cast<int>(get_long(kv, "pipeline.k_outer", pc.k_outer));
  pc.k_inner = static_cast<int>(get_long(kv, "pipeline.k_inner", pc.k_inner));
  pc.representation_per_fold =
      get_bool(kv, "pipeline.representation_per_fold", pc.representation_per_fold);
  pc.vocab_min_count = get_long(kv, "pipeline.vocab_min_count", pc.vocab_min_count);
  const long mdl = get_long(kv, "pipeline.min_doc_len", static_cast<long>(pc.min_doc_len));
  if (mdl < 0) throw validation_error("config key 'pipeline.min_doc_len': must be >= 0");
  pc.min_doc_len = static_cast<std::size_t>(mdl);

  const long trees = get_long(kv, "forest.n_estimators", 500);
  if (trees <= 0) throw validation_error("config key 'forest.n_estimators': must be > 0");
  pc.forest_grid = harness::default_forest_grid(static_cast<int>(trees));
  apply_grid_limit(pc.forest_grid, get_long(kv, "forest.grid_limit", 0), "forest.grid_limit");
  pc.svm_grid = harness::default_svm_grid();
  apply_grid_limit(pc.svm_grid, get_long(kv, "svm.grid_limit", 0), "svm.grid_limit");

  pc.lda.topics = static_cast<int>(get_long(kv, "lda.topics", pc.lda.topics));
  pc.lda.alpha = get_double(kv, "lda.alpha", pc.lda.alpha);
  pc.lda.beta = get_double(kv, "lda.beta", pc.lda.beta);
  pc.lda.iterations = static_cast<int>(get_long(kv, "lda.iterations", pc.lda.iterations));
  pc.lda.seed = get_u64(kv, "lda.seed", seed);

  pc.pv.vector_size = static_cast<int>(get_long(kv, "pv.vector_size", pc.pv.vector_size));
  pc.pv.window = static_cast<int>(get_long(kv, "pv.window", pc.pv.window));
  pc.pv.min_count = get_long(kv, "pv.min_count", pc.pv.min_count);
  pc.pv.epochs = static_cast<int>(get_long(kv, "pv.epochs", pc.pv.epochs));
  pc.pv.negative_samples =
      static_cast<int>(get_long(kv, "pv.negative_samples", pc.pv.negative_samples));
  pc.pv.initial_lr = get_double(kv, "pv.initial_lr", pc.pv.initial_lr);
  pc.pv.final_lr = get_double(kv, "pv.final_lr", pc.pv.final_lr);
  pc.pv.seed = get_u64(kv, "pv.seed", seed);
  return pc;
}

bool has_compare_keys(const KvMap& kv) {
  return kv.count("compare.representation") || kv.count("compare.classifier") ||
         kv.count("compare.use_structured");
}

harness::PipelineConfig compare_pipeline_from(const KvMap& kv, std::uint64_t seed) {
  if (!has_compare_keys(kv))
    throw validation_error("comparison requires at least one compare.* key");
  harness::PipelineConfig pc = pipeline_from(kv, seed);
  pc.representation = parse_representation(kv, "compare.representation", pc.representation);
  pc.classifier = parse_classifier(kv, "compare.classifier", pc.classifier);
  pc.use_structured = get_bool(kv, "compare.use_structured", pc.use_structured);
  return pc;
}

synthgen::SynthConfig synth_from(const KvMap& kv, std::uint64_t seed) {
  const double scale = get_double(kv, "synth.scale", 1.0);
  synthgen::SynthConfig c = synthgen::scaled_config(scale);
  c.n_patients = get_long(kv, "synth.n_patients", c.n_patients);
  c.n_periods = get_long(kv, "synth.n_periods", c.n_periods);
  c.positive_fraction = get_double(kv, "synth.positive_fraction", c.positive_fraction);
  c.vocab_size = get_long(kv, "synth.vocab_size", c.vocab_size);
  c.n_true_topics = static_cast<int>(get_long(kv, "synth.n_true_topics", c.n_true_topics));
  c.association = get_double(kv, "synth.association", c.association);
  c.age_positive.mean = get_double(kv, "synth.age_positive_mean", c.age_positive.mean);
  c.age_positive.sd = get_double(kv, "synth.age_positive_sd", c.age_positive.sd);
  c.age_negative.mean = get_double(kv, "synth.age_negative_mean", c.age_negative.mean);
  c.age_negative.sd = get_double(kv, "synth.age_negative_sd", c.age_negative.sd);
  c.words_positive.mean = get_double(kv, "synth.words_positive_mean", c.words_positive.mean);
  c.words_positive.sd = get_double(kv, "synth.words_positive_sd", c.words_positive.sd);
  c.words_negative.mean = get_double(kv, "synth.words_negative_mean", c.words_negative.mean);
  c.words_negative.sd = get_double(kv, "synth.words_negative_sd", c.words_negative.sd);
  c.stopword_rate = get_double(kv, "synth.stopword_rate", c.stopword_rate);
  c.suffix_rate = get_double(kv, "synth.suffix_rate", c.suffix_rate);
  c.short_fraction = get_double(kv, "synth.short_fraction", c.short_fraction);
  c.doc_alpha = get_double(kv, "synth.doc_alpha", c.doc_alpha);
  c.seed = seed;
  return c;
}

}  // namespace notewatch::runconfig
