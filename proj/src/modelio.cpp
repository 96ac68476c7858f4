#include "notewatch/modelio.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "notewatch/common.hpp"

namespace notewatch::modelio {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'N', 'W', 'M', 'O', 'D', 'L', '0', '1'};
constexpr int kFormatVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void append_doubles(std::string& out, const std::vector<double>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    const std::size_t at = out.size();
    out.resize(at + values.size() * 8);
    std::memcpy(out.data() + at, values.data(), values.size() * 8);
  } else {
    for (const double d : values) put_u64(out, std::bit_cast<std::uint64_t>(d));
  }
}

std::vector<double> read_doubles(const unsigned char* p, std::size_t count) {
  std::vector<double> v(count);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(v.data(), p, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) v[i] = std::bit_cast<double>(get_u64(p + 8 * i));
  }
  return v;
}

struct Blob {
  std::string name;
  std::vector<double> values;
};

void write_container(const std::string& path, json header, const std::vector<Blob>& blobs) {
  header["format_version"] = kFormatVersion;
  header["library_version"] = kVersion;
  json blob_index = json::array();
  for (const auto& b : blobs) blob_index.push_back({{"name", b.name}, {"count", b.values.size()}});
  header["blobs"] = std::move(blob_index);

  const std::string head = header.dump();
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u64(out, head.size());
  out += head;
  for (const auto& b : blobs) append_doubles(out, b.values);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw runtime_failure("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw runtime_failure("write failed: " + path);
}

struct Container {
  json header;
  std::vector<Blob> blobs;

  const std::vector<double>& blob(const std::string& name) const {
    for (const auto& b : blobs)
      if (b.name == name) return b.values;
    throw runtime_failure("model file lacks blob '" + name + "'");
  }
};

json parse_header(const std::string& path, const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw runtime_failure("not a model file: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t head_len = get_u64(p + 8);
  if (16 + head_len > bytes.size()) throw runtime_failure("truncated model header: " + path);
  json header = json::parse(bytes.substr(16, head_len), nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw runtime_failure("corrupt model header: " + path);
  if (header.value("format_version", -1) != kFormatVersion)
    throw runtime_failure("unsupported model format version in " + path);
  return header;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw runtime_failure("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return std::move(buf).str();
}

Container read_container(const std::string& path, const std::string& want_kind) {
  const std::string bytes = read_file(path);
  Container c;
  c.header = parse_header(path, bytes);
  const std::string kind = c.header.value("kind", "");
  if (kind != want_kind)
    throw validation_error(path + " holds a '" + kind + "' model, expected '" + want_kind + "'");

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t at = 16 + static_cast<std::size_t>(get_u64(p + 8));
  for (const auto& entry : c.header.at("blobs")) {
    Blob b;
    b.name = entry.at("name").get<std::string>();
    const auto count = entry.at("count").get<std::size_t>();
    if (at + count * 8 > bytes.size()) throw runtime_failure("truncated model data: " + path);
    b.values = read_doubles(p + at, count);
    at += count * 8;
    c.blobs.push_back(std::move(b));
  }
  return c;
}

json vocab_to_json(const vocab::Vocabulary& v) {
  return json{{"terms", v.terms}, {"corpus_freq", v.corpus_freq}, {"doc_freq", v.doc_freq}};
}

vocab::Vocabulary vocab_from_json(const json& j) {
  vocab::Vocabulary v;
  v.terms = j.at("terms").get<std::vector<std::string>>();
  v.corpus_freq = j.at("corpus_freq").get<std::vector<long>>();
  v.doc_freq = j.at("doc_freq").get<std::vector<long>>();
  if (v.corpus_freq.size() != v.terms.size() || v.doc_freq.size() != v.terms.size())
    throw runtime_failure("model vocabulary arrays disagree in length");
  v.ids.reserve(v.terms.size());
  for (std::size_t i = 0; i < v.terms.size(); ++i) v.ids[v.terms[i]] = static_cast<int>(i);
  return v;
}

}  // namespace

std::string sniff_kind(const std::string& path) {
  const std::string bytes = read_file(path);
  return parse_header(path, bytes).value("kind", "");
}

void save_topic_model(const std::string& path, const topics::TopicModel& m) {
  json header{{"kind", "lda"},
              {"k", m.K},
              {"alpha", m.alpha},
              {"beta", m.beta},
              {"vocab", vocab_to_json(m.vocab)},
              {"ll_trace", m.ll_trace}};
  write_container(path, std::move(header), {{"phi", m.phi}});
}

topics::TopicModel load_topic_model(const std::string& path) {
  const Container c = read_container(path, "lda");
  topics::TopicModel m;
  m.K = c.header.at("k").get<int>();
  m.alpha = c.header.at("alpha").get<double>();
  m.beta = c.header.at("beta").get<double>();
  m.vocab = vocab_from_json(c.header.at("vocab"));
  m.ll_trace = c.header.at("ll_trace").get<std::vector<std::pair<int, double>>>();
  m.phi = c.blob("phi");
  if (m.K <= 0 || m.phi.size() != static_cast<std::size_t>(m.K) * m.vocab.terms.size())
    throw runtime_failure("topic matrix size disagrees with header: " + path);
  return m;
}

void save_pv_model(const std::string& path, const embeddings::ParagraphVectorModel& m) {
  const auto& c = m.config;
  json header{{"kind", "pv"},
              {"config",
               {{"vector_size", c.vector_size},
                {"window", c.window},
                {"min_count", c.min_count},
                {"epochs", c.epochs},
                {"negative_samples", c.negative_samples},
                {"initial_lr", c.initial_lr},
                {"final_lr", c.final_lr},
                {"seed", c.seed}}},
              {"vocab", vocab_to_json(m.vocab)},
              {"doc_ids", m.doc_ids},
              {"loss_trace", m.loss_trace},
              {"last_step_lr", m.last_step_lr}};
  write_container(path, std::move(header),
                  {{"word_in", m.word_in},
                   {"word_out", m.word_out},
                   {"doc_vecs", m.doc_vecs},
                   {"neg_cum", m.neg_cum}});
}

embeddings::ParagraphVectorModel load_pv_model(const std::string& path) {
  const Container c = read_container(path, "pv");
  embeddings::ParagraphVectorModel m;
  const json& cfg = c.header.at("config");
  m.config.vector_size = cfg.at("vector_size").get<int>();
  m.config.window = cfg.at("window").get<int>();
  m.config.min_count = cfg.at("min_count").get<long>();
  m.config.epochs = cfg.at("epochs").get<int>();
  m.config.negative_samples = cfg.at("negative_samples").get<int>();
  m.config.initial_lr = cfg.at("initial_lr").get<double>();
  m.config.final_lr = cfg.at("final_lr").get<double>();
  m.config.seed = cfg.at("seed").get<std::uint64_t>();
  m.vocab = vocab_from_json(c.header.at("vocab"));
  m.doc_ids = c.header.at("doc_ids").get<std::vector<std::string>>();
  m.loss_trace = c.header.at("loss_trace").get<std::vector<double>>();
  m.last_step_lr = c.header.at("last_step_lr").get<double>();
  m.doc_index.reserve(m.doc_ids.size());
  for (std::size_t i = 0; i < m.doc_ids.size(); ++i)
    m.doc_index[m.doc_ids[i]] = static_cast<int>(i);
  m.word_in = c.blob("word_in");
  m.word_out = c.blob("word_out");
  m.doc_vecs = c.blob("doc_vecs");
  m.neg_cum = c.blob("neg_cum");

  const auto dim = static_cast<std::size_t>(m.config.vector_size);
  const std::size_t v = m.vocab.terms.size();
  if (m.config.vector_size <= 0 || m.word_in.size() != v * dim || m.word_out.size() != v * dim ||
      m.doc_vecs.size() != m.doc_ids.size() * dim || m.neg_cum.size() != v)
    throw runtime_failure("embedding matrix sizes disagree with header: " + path);
  return m;
}

namespace {

json forest_config_to_json(const forest::RandomForestConfig& c) {
  return json{{"n_estimators", c.n_estimators},
              {"min_samples_leaf", c.min_samples_leaf},
              {"max_features", c.max_features},
              {"criterion", c.criterion == forest::Criterion::gini ? "gini" : "entropy"},
              {"seed", c.seed}};
}

forest::RandomForestConfig forest_config_from_json(const json& j) {
  forest::RandomForestConfig c;
  c.n_estimators = j.at("n_estimators").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  c.max_features = j.at("max_features").get<int>();
  const std::string crit = j.at("criterion").get<std::string>();
  if (crit != "gini" && crit != "entropy")
    throw runtime_failure("unknown split criterion '" + crit + "'");
  c.criterion = crit == "gini" ? forest::Criterion::gini : forest::Criterion::entropy;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void save_forest(const std::string& path, const forest::ForestModel& m) {
  std::vector<std::size_t> node_counts;
  std::vector<double> feature, threshold, left, right, vote;
  for (const auto& t : m.trees) {
    node_counts.push_back(t.nodes.size());
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      vote.push_back(n.vote);
    }
  }
  json header{{"kind", "forest"},
              {"config", forest_config_to_json(m.config)},
              {"feature_names", m.feature_names},
              {"warnings", m.warnings},
              {"tree_node_counts", node_counts}};
  write_container(path, std::move(header),
                  {{"feature", feature},
                   {"threshold", threshold},
                   {"left", left},
                   {"right", right},
                   {"vote", vote},
                   {"importances", m.importances}});
}

forest::ForestModel load_forest(const Container& c, const std::string& path) {
  forest::ForestModel m;
  m.config = forest_config_from_json(c.header.at("config"));
  m.feature_names = c.header.at("feature_names").get<std::vector<std::string>>();
  m.warnings = c.header.at("warnings").get<std::vector<std::string>>();
  m.importances = c.blob("importances");
  const auto counts = c.header.at("tree_node_counts").get<std::vector<std::size_t>>();
  const auto& feature = c.blob("feature");
  const auto& threshold = c.blob("threshold");
  const auto& left = c.blob("left");
  const auto& right = c.blob("right");
  const auto& vote = c.blob("vote");
  std::size_t total = 0;
  for (const auto n : counts) total += n;
  if (feature.size() != total || threshold.size() != total || left.size() != total ||
      right.size() != total || vote.size() != total)
    throw runtime_failure("tree arrays disagree with node counts: " + path);
  if (m.importances.size() != m.feature_names.size())
    throw runtime_failure("importance length disagrees with feature names: " + path);
  std::size_t at = 0;
  for (const auto n : counts) {
    forest::Tree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i, ++at) {
      t.nodes[i].feature = static_cast<int>(feature[at]);
      t.nodes[i].threshold = threshold[at];
      t.nodes[i].left = static_cast<int>(left[at]);
      t.nodes[i].right = static_cast<int>(right[at]);
      t.nodes[i].vote = static_cast<int>(vote[at]);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

json svm_config_to_json(const svm::SvmConfig& c) {
  return json{{"C", c.C},
              {"gamma", c.gamma},
              {"tolerance", c.tolerance},
              {"max_iterations", c.max_iterations},
              {"platt_folds", c.platt_folds},
              {"seed", c.seed},
              {"kernel_cache_rows", c.kernel_cache_rows}};
}

svm::SvmConfig svm_config_from_json(const json& j) {
  svm::SvmConfig c;
  c.C = j.at("C").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.tolerance = j.at("tolerance").get<double>();
  c.max_iterations = j.at("max_iterations").get<long>();
  c.platt_folds = j.at("platt_folds").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.kernel_cache_rows = j.at("kernel_cache_rows").get<std::size_t>();
  return c;
}

void save_svm(const std::string& path, const svm::SvmModel& m,
              const std::optional<features::StandardizeParams>& std_params) {
  json header{{"kind", "svm"},
              {"config", svm_config_to_json(m.config)},
              {"feature_names", m.feature_names},
              {"bias", m.bias},
              {"platt_a", m.platt_a},
              {"platt_b", m.platt_b},
              {"converged", m.converged},
              {"platt_in_sample", m.platt_in_sample},
              {"warnings", m.warnings},
              {"n_sv", m.n_sv()}};
  std::vector<Blob> blobs{{"support", m.support}, {"coef", m.coef}};
  header["standardize"] = static_cast<bool>(std_params);
  if (std_params) {
    header["standardize_warnings"] = std_params->warnings;
    blobs.push_back({"standardize_mean", std_params->mean});
    blobs.push_back({"standardize_scale", std_params->scale});
  }
  write_container(path, std::move(header), blobs);
}

}  // namespace

void save_classifier(const std::string& path, const ClassifierArtifact& m) {
  if (m.model.kind() == classifiers::Kind::forest) {
    if (m.standardize)
      throw validation_error("forest artifacts carry no standardization parameters");
    save_forest(path, std::get<forest::ForestModel>(m.model.model));
  } else {
    save_svm(path, std::get<svm::SvmModel>(m.model.model), m.standardize);
  }
}

ClassifierArtifact load_classifier(const std::string& path) {
  const std::string kind = sniff_kind(path);
  ClassifierArtifact out;
  if (kind == "forest") {
    const Container c = read_container(path, "forest");
    out.model.model = load_forest(c, path);
    return out;
  }
  if (kind != "svm")
    throw validation_error(path + " holds a '" + kind + "' model, expected a classifier");
  const Container c = read_container(path, "svm");
  svm::SvmModel m;
  m.config = svm_config_from_json(c.header.at("config"));
  m.feature_names = c.header.at("feature_names").get<std::vector<std::string>>();
  m.bias = c.header.at("bias").get<double>();
  m.platt_a = c.header.at("platt_a").get<double>();
  m.platt_b = c.header.at("platt_b").get<double>();
  m.converged = c.header.at("converged").get<bool>();
  m.platt_in_sample = c.header.at("platt_in_sample").get<bool>();
  m.warnings = c.header.at("warnings").get<std::vector<std::string>>();
  m.support = c.blob("support");
  m.coef = c.blob("coef");
  const std::size_t d = m.feature_names.size();
  if (c.header.at("n_sv").get<std::size_t>() != m.coef.size() ||
      m.support.size() != m.coef.size() * d)
    throw runtime_failure("support vector sizes disagree with header: " + path);
  if (c.header.at("standardize").get<bool>()) {
    features::StandardizeParams p;
    p.mean = c.blob("standardize_mean");
    p.scale = c.blob("standardize_scale");
    p.warnings = c.header.at("standardize_warnings").get<std::vector<std::string>>();
    if (p.mean.size() != d || p.scale.size() != d)
      throw runtime_failure("standardization sizes disagree with header: " + path);
    out.standardize = std::move(p);
  }
  out.model.model = std::move(m);
  return out;
}

}  // namespace notewatch::modelio
