// Command-line entry point wiring corpus assembly, normalization, topic and
// embedding training, classification and evaluation. Every subcommand writes
// only under its --out directory and leaves a manifest.json there recording
// the resolved configuration, seeds, input checksums and wall time.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "notewatch/classifiers.hpp"
#include "notewatch/common.hpp"
#include "notewatch/corpus.hpp"
#include "notewatch/csvio.hpp"
#include "notewatch/embeddings.hpp"
#include "notewatch/features.hpp"
#include "notewatch/harness.hpp"
#include "notewatch/metrics.hpp"
#include "notewatch/modelio.hpp"
#include "notewatch/parallel.hpp"
#include "notewatch/rng.hpp"
#include "notewatch/runconfig.hpp"
#include "notewatch/svgplot.hpp"
#include "notewatch/synthgen.hpp"
#include "notewatch/textnorm.hpp"
#include "notewatch/topics.hpp"
#include "notewatch/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace notewatch;

namespace {

int g_verbosity = 1;

void say(const std::string& line) {
  if (g_verbosity >= 1) std::cout << line << "\n";
}

void say_verbose(const std::string& line) {
  if (g_verbosity >= 2) std::cout << line << "\n";
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_failure("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string checksum_hex(const std::string& path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file_bytes(path))));
  return buf;
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path))
    throw validation_error(what + " not found: " + path);
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw validation_error("--out directory is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw runtime_failure("cannot create output directory " + out + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// The run manifest is written last; a manifest already present in the
// directory (a dataset manifest or an earlier run) is preserved under
// "prior_manifest" so the directory keeps its full provenance chain.
void write_run_manifest(const std::string& out_dir, json body) {
  const std::string path = join_path(out_dir, "manifest.json");
  if (fs::exists(path)) {
    json prior = json::parse(read_file_bytes(path), nullptr, false);
    if (!prior.is_discarded()) body["prior_manifest"] = std::move(prior);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw runtime_failure("cannot open for writing: " + path);
  const std::string text = body.dump(2) + "\n";
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw runtime_failure("write failed: " + path);
}

json manifest_base(const std::string& command, std::uint64_t seed, int jobs) {
  return json{{"command", command}, {"version", kVersion}, {"seed", seed}, {"jobs", jobs}};
}

// Flag > NOTEWATCH_SEED > config key > 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const runconfig::KvMap* kv) {
  if (flag) return *flag;
  if (const char* env = std::getenv("NOTEWATCH_SEED")) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno || end == env || *end != '\0')
      throw validation_error("NOTEWATCH_SEED must be an unsigned integer, got '" +
                             std::string(env) + "'");
    return v;
  }
  if (kv) return runconfig::get_u64(*kv, "seed", 0);
  return 0;
}

int resolve_jobs(int flag, const runconfig::KvMap* kv) {
  int jobs = flag;
  if (jobs < 0) jobs = kv ? static_cast<int>(runconfig::get_long(*kv, "jobs", 1)) : 1;
  if (jobs < 0) throw validation_error("jobs must be >= 0");
  return jobs;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV artifact writers

json checksum_outputs(const std::string& out_dir, const std::vector<std::string>& names) {
  json outputs = json::object();
  for (const auto& n : names) outputs[n] = checksum_hex(join_path(out_dir, n));
  return outputs;
}

void write_histograms_csv(const std::string& path, const synthgen::DatasetReport& report) {
  csvio::Table t;
  t.header = {"variable", "class", "bin_lo", "bin_width", "count"};
  const auto add = [&](const char* variable, const char* klass, const synthgen::Histogram& h) {
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      t.rows.push_back({variable, klass,
                        csvio::format_double(h.lo + h.width * static_cast<double>(i)),
                        csvio::format_double(h.width), std::to_string(h.counts[i])});
  };
  add("age", "positive", report.positive.ages);
  add("age", "negative", report.negative.ages);
  add("words", "positive", report.positive.words);
  add("words", "negative", report.negative.words);
  csvio::write_table(path, t);
}

void write_summary_csv(const std::string& path, const harness::NestedCvResult& run) {
  csvio::Table t;
  t.header = {"fold", "cell", "cell_description", "pr_auc", "roc_auc",
              "f2_max", "f2_threshold", "inner_mean"};
  for (const auto& f : run.folds)
    t.rows.push_back({std::to_string(f.fold), std::to_string(f.chosen_cell),
                      harness::describe_cell(run.config, f.chosen_cell),
                      csvio::format_double(f.pr_auc), csvio::format_double(f.roc_auc),
                      csvio::format_double(f.f2.value), csvio::format_double(f.f2.threshold),
                      csvio::format_double(f.inner_mean)});
  t.rows.push_back({"mean", "", "", csvio::format_double(run.summary.pr_auc.mean),
                    csvio::format_double(run.summary.roc_auc.mean),
                    csvio::format_double(run.summary.f2_max.mean), "", ""});
  csvio::write_table(path, t);
}

void write_scores_csv(const std::string& path, const harness::NestedCvResult& run) {
  csvio::Table t;
  t.header = {"fold", "period_id", "label", "score"};
  for (const auto& f : run.folds)
    for (std::size_t i = 0; i < f.period_ids.size(); ++i)
      t.rows.push_back({std::to_string(f.fold), f.period_ids[i], std::to_string(f.labels[i]),
                        csvio::format_double(f.scores[i])});
  csvio::write_table(path, t);
}

void pooled_scores(const harness::NestedCvResult& run, std::vector<double>& scores,
                   std::vector<int>& labels) {
  for (const auto& f : run.folds) {
    scores.insert(scores.end(), f.scores.begin(), f.scores.end());
    labels.insert(labels.end(), f.labels.begin(), f.labels.end());
  }
}

void write_curve_csv(const std::string& path, const metrics::Curve& curve, const char* x_name,
                     const char* y_name) {
  csvio::Table t;
  t.header = {"threshold", x_name, y_name};
  for (const auto& p : curve.points)
    t.rows.push_back(
        {csvio::format_double(p.threshold), csvio::format_double(p.x), csvio::format_double(p.y)});
  csvio::write_table(path, t);
}

void write_importance_csvs(const std::string& out_dir, const harness::NestedCvResult& run,
                           const std::string& suffix, std::vector<std::string>& written) {
  const auto audit = harness::importance_audit(run);
  csvio::Table folds;
  folds.header = {"fold", "rank", "feature", "importance"};
  for (std::size_t f = 0; f < audit.top_per_fold.size(); ++f)
    for (std::size_t r = 0; r < audit.top_per_fold[f].size(); ++r)
      folds.rows.push_back({std::to_string(f), std::to_string(r + 1),
                            audit.top_per_fold[f][r].first,
                            csvio::format_double(audit.top_per_fold[f][r].second)});
  const std::string folds_name = "importance" + suffix + ".csv";
  csvio::write_table(join_path(out_dir, folds_name), folds);
  written.push_back(folds_name);

  csvio::Table summary;
  summary.header = {"kind", "rank", "feature", "value"};
  for (std::size_t r = 0; r < audit.by_repetition.size(); ++r)
    summary.rows.push_back({"repetition", std::to_string(r + 1), audit.by_repetition[r].first,
                            std::to_string(audit.by_repetition[r].second)});
  for (std::size_t r = 0; r < audit.by_total.size(); ++r)
    summary.rows.push_back({"total", std::to_string(r + 1), audit.by_total[r].first,
                            csvio::format_double(audit.by_total[r].second)});
  const std::string summary_name = "importance_summary" + suffix + ".csv";
  csvio::write_table(join_path(out_dir, summary_name), summary);
  written.push_back(summary_name);
}

json summary_to_json(const metrics::MetricSummary& s) {
  const auto stat = [](const metrics::MetricStat& m) {
    return json{{"mean", m.mean}, {"stddev", m.stddev}, {"per_fold", m.per_fold}};
  };
  return json{{"pr_auc", stat(s.pr_auc)},
              {"roc_auc", stat(s.roc_auc)},
              {"f2_max", stat(s.f2_max)},
              {"f2_thresholds", s.f2_thresholds}};
}

// ---------------------------------------------------------------------------
// SVG rendering from exported CSVs

std::vector<double> numeric_column(const csvio::Table& t, const std::string& name) {
  const std::size_t c = csvio::column(t, name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) out.push_back(csvio::parse_double(row[c]));
  return out;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw runtime_failure("cannot open for writing: " + path);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw runtime_failure("write failed: " + path);
}

// Renders every renderable CSV found in in_dir into out_dir; returns the
// SVG file names written.
std::vector<std::string> render_svgs(const std::string& in_dir, const std::string& out_dir) {
  std::vector<std::string> written;

  const std::string pr_path = join_path(in_dir, "pr_curve.csv");
  if (fs::is_regular_file(pr_path)) {
    const auto t = csvio::read_table(pr_path);
    svgplot::Series s{"model", numeric_column(t, "recall"), numeric_column(t, "precision")};
    svgplot::ChartOptions opt;
    opt.title = "Precision-recall curve";
    opt.x_label = "recall";
    opt.y_label = "precision";
    opt.x_lo = 0.0, opt.x_hi = 1.0;
    opt.y_lo = 0.0, opt.y_hi = 1.05;
    write_text_file(join_path(out_dir, "pr_curve.svg"), svgplot::line_chart({s}, opt));
    written.push_back("pr_curve.svg");
  }

  const std::string roc_path = join_path(in_dir, "roc_curve.csv");
  if (fs::is_regular_file(roc_path)) {
    const auto t = csvio::read_table(roc_path);
    svgplot::Series model{"model", numeric_column(t, "fpr"), numeric_column(t, "tpr")};
    svgplot::Series chance{"chance", {0.0, 1.0}, {0.0, 1.0}};
    svgplot::ChartOptions opt;
    opt.title = "ROC curve";
    opt.x_label = "false positive rate";
    opt.y_label = "true positive rate";
    opt.x_lo = 0.0, opt.x_hi = 1.0;
    opt.y_lo = 0.0, opt.y_hi = 1.05;
    write_text_file(join_path(out_dir, "roc_curve.svg"), svgplot::line_chart({model, chance}, opt));
    written.push_back("roc_curve.svg");
  }

  const std::string sweep_path = join_path(in_dir, "kappa_sweep.csv");
  if (fs::is_regular_file(sweep_path)) {
    const auto t = csvio::read_table(sweep_path);
    const std::size_t c_thr = csvio::column(t, "threshold");
    const std::size_t c_kap = csvio::column(t, "kappa");
    const std::size_t c_def = csvio::column(t, "defined");
    svgplot::Series s;
    s.label = "agreement";
    for (const auto& row : t.rows) {
      if (row[c_def] != "1") continue;
      s.x.push_back(csvio::parse_double(row[c_thr]));
      s.y.push_back(csvio::parse_double(row[c_kap]));
    }
    if (!s.x.empty()) {
      svgplot::ChartOptions opt;
      opt.title = "Inter-classifier agreement by threshold";
      opt.x_label = "decision threshold";
      opt.y_label = "Cohen's kappa";
      opt.x_lo = 0.0, opt.x_hi = 1.0;
      write_text_file(join_path(out_dir, "kappa_sweep.svg"), svgplot::line_chart({s}, opt));
      written.push_back("kappa_sweep.svg");
    }
  }

  const std::string hist_path = join_path(in_dir, "histograms.csv");
  if (fs::is_regular_file(hist_path)) {
    const auto t = csvio::read_table(hist_path);
    const std::size_t c_var = csvio::column(t, "variable");
    const std::size_t c_cls = csvio::column(t, "class");
    const std::size_t c_lo = csvio::column(t, "bin_lo");
    const std::size_t c_w = csvio::column(t, "bin_width");
    const std::size_t c_n = csvio::column(t, "count");
    const auto render_hist = [&](const std::string& variable, const std::string& file,
                                 const char* title, const char* x_label) {
      double lo = 0.0, width = 0.0;
      bool seen = false;
      svgplot::BarSeries pos{"positive", {}}, neg{"negative", {}};
      for (const auto& row : t.rows) {
        if (row[c_var] != variable) continue;
        if (!seen) {
          lo = csvio::parse_double(row[c_lo]);
          seen = true;
        }
        width = csvio::parse_double(row[c_w]);
        (row[c_cls] == "positive" ? pos : neg).values.push_back(csvio::parse_double(row[c_n]));
      }
      if (!seen) return;
      svgplot::ChartOptions opt;
      opt.title = title;
      opt.x_label = x_label;
      opt.y_label = "admission periods";
      write_text_file(join_path(out_dir, file), svgplot::bar_chart(lo, width, {pos, neg}, opt));
      written.push_back(file);
    };
    render_hist("age", "age_hist.svg", "Age at admission start", "years");
    render_hist("words", "words_hist.svg", "Period note length", "words");
  }

  return written;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out;
  std::string config_path;
  double scale = -1.0;  // <= 0: from config (default 1.0)
  std::optional<std::uint64_t> seed;
  int jobs = -1;
};

void run_synth(const SynthArgs& a) {
  Timer timer;
  runconfig::KvMap kv;
  if (!a.config_path.empty()) kv = runconfig::parse_config_file(a.config_path);
  const std::uint64_t seed = resolve_seed(a.seed, &kv);
  const int jobs = resolve_jobs(a.jobs, &kv);
  if (a.scale > 0.0) kv["synth.scale"] = csvio::format_double(a.scale);
  const synthgen::SynthConfig cfg = runconfig::synth_from(kv, seed);

  ensure_out_dir(a.out);
  const auto ds = synthgen::generate(cfg, jobs == 0 ? 0 : jobs);
  synthgen::write_corpus(ds, a.out);

  json body = manifest_base("synth", seed, jobs);
  if (!a.config_path.empty()) body["inputs"] = {{a.config_path, checksum_hex(a.config_path)}};
  body["config"] = json::object();
  for (const auto& [k, v] : kv) body["config"][k] = v;
  body["stats"] = {{"n_patients", ds.stats.n_patients},
                   {"n_periods", ds.stats.n_periods},
                   {"n_positive", ds.stats.n_positive},
                   {"positive_fraction", ds.stats.positive_fraction},
                   {"n_notes", ds.stats.n_notes},
                   {"n_incidents", ds.stats.n_incidents}};
  body["outputs"] = checksum_outputs(
      a.out, {"notes.jsonl", "admissions.jsonl", "incidents.jsonl", "structured.jsonl"});
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
  say("synth: " + std::to_string(ds.stats.n_periods) + " periods, " +
      std::to_string(ds.stats.n_patients) + " patients, prevalence " +
      fmt4(ds.stats.positive_fraction) + " -> " + a.out);
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string dir, notes, admissions, incidents, structured;
  std::string config_path;
  std::string out;
};

struct CorpusPaths {
  std::string notes, admissions, incidents, structured;
};

CorpusPaths resolve_corpus_paths(const std::string& dir, const std::string& notes,
                                 const std::string& admissions, const std::string& incidents,
                                 const std::string& structured, const runconfig::KvMap& kv) {
  CorpusPaths p;
  const std::string base = !dir.empty() ? dir : runconfig::get_string(kv, "data.dir", "");
  const auto pick = [&](const std::string& flag, const char* key, const char* name) {
    if (!flag.empty()) return flag;
    const std::string from_kv = runconfig::get_string(kv, key, "");
    if (!from_kv.empty()) return from_kv;
    if (!base.empty()) return join_path(base, name);
    throw validation_error(std::string("no path for ") + name +
                           ": pass --dir, the file flag, or set " + key);
  };
  p.notes = pick(notes, "data.notes", "notes.jsonl");
  p.admissions = pick(admissions, "data.admissions", "admissions.jsonl");
  p.incidents = pick(incidents, "data.incidents", "incidents.jsonl");
  p.structured = pick(structured, "data.structured", "structured.jsonl");
  require_file(p.notes, "notes file");
  require_file(p.admissions, "admissions file");
  require_file(p.incidents, "incidents file");
  require_file(p.structured, "structured file");
  return p;
}

void run_ingest(const IngestArgs& a) {
  Timer timer;
  runconfig::KvMap kv;
  if (!a.config_path.empty()) kv = runconfig::parse_config_file(a.config_path);
  const CorpusPaths p =
      resolve_corpus_paths(a.dir, a.notes, a.admissions, a.incidents, a.structured, kv);
  ensure_out_dir(a.out);

  const auto raw = corpus::ingest(p.notes, p.admissions, p.incidents, p.structured);
  const auto assembled =
      corpus::assemble_periods(raw.notes, raw.admissions, raw.incidents, raw.structured);
  corpus::write_dataset(join_path(a.out, "dataset.jsonl"), assembled.records);
  write_histograms_csv(join_path(a.out, "histograms.csv"),
                       synthgen::describe(assembled.records));

  long positives = 0;
  for (const auto& r : assembled.records) positives += r.label ? 1 : 0;

  json body = manifest_base("ingest", 0, 1);
  body.erase("seed");  // nothing random happens here
  body["inputs"] = {{p.notes, checksum_hex(p.notes)},
                    {p.admissions, checksum_hex(p.admissions)},
                    {p.incidents, checksum_hex(p.incidents)},
                    {p.structured, checksum_hex(p.structured)}};
  if (!a.config_path.empty()) body["inputs"][a.config_path] = checksum_hex(a.config_path);
  body["counts"] = {{"notes", raw.notes.size()},
                    {"admissions", raw.admissions.size()},
                    {"incidents", raw.incidents.size()},
                    {"structured_rows", raw.structured.size()},
                    {"malformed_lines_skipped", raw.warning_count},
                    {"records", assembled.records.size()},
                    {"empty_note_periods", assembled.empty_note_periods},
                    {"positive_records", positives}};
  body["outputs"] = checksum_outputs(a.out, {"dataset.jsonl", "histograms.csv"});
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
  say("ingest: " + std::to_string(assembled.records.size()) + " records (" +
      std::to_string(positives) + " positive, " + std::to_string(raw.warning_count) +
      " malformed lines skipped) -> " + join_path(a.out, "dataset.jsonl"));
}

// ---------------------------------------------------------------------------
// normalize

struct NormalizeArgs {
  std::string in;
  std::string stopwords;
  std::string config_path;
  std::string out;
  int jobs = -1;
};

std::vector<textnorm::TokenDoc> normalize_records(const std::vector<corpus::PeriodRecord>& records,
                                                  const textnorm::NormalizationResources& res,
                                                  int jobs) {
  std::vector<textnorm::TokenDoc> docs(records.size());
  parallel_for(records.size(), jobs == 0 ? 0 : static_cast<unsigned>(jobs), [&](std::size_t i) {
    docs[i].doc_id = records[i].period_id;
    docs[i].tokens = textnorm::normalize(records[i].period_note, res);
  });
  return docs;
}

void run_normalize(const NormalizeArgs& a) {
  Timer timer;
  runconfig::KvMap kv;
  if (!a.config_path.empty()) kv = runconfig::parse_config_file(a.config_path);
  const std::string in =
      !a.in.empty() ? a.in : runconfig::get_string(kv, "data.dataset", "");
  if (in.empty()) throw validation_error("pass --in or set data.dataset");
  require_file(in, "dataset file");
  const std::string stopwords =
      !a.stopwords.empty() ? a.stopwords : runconfig::get_string(kv, "resources.stopwords", "");
  if (stopwords.empty()) throw validation_error("pass --stopwords or set resources.stopwords");
  require_file(stopwords, "stopword file");
  const int jobs = resolve_jobs(a.jobs, &kv);
  ensure_out_dir(a.out);

  const auto records = corpus::read_dataset(in);
  const auto res = textnorm::load_resources(stopwords);
  const auto docs = normalize_records(records, res, jobs);
  textnorm::write_token_docs(join_path(a.out, "token_docs.jsonl"), docs);

  long total_tokens = 0, empty_docs = 0;
  for (const auto& d : docs) {
    total_tokens += static_cast<long>(d.tokens.size());
    empty_docs += d.tokens.empty() ? 1 : 0;
  }

  json body = manifest_base("normalize", 0, jobs);
  body.erase("seed");
  body["inputs"] = {{in, checksum_hex(in)}, {stopwords, checksum_hex(stopwords)}};
  if (!a.config_path.empty()) body["inputs"][a.config_path] = checksum_hex(a.config_path);
  body["counts"] = {{"docs", docs.size()},
                    {"total_tokens", total_tokens},
                    {"empty_docs", empty_docs}};
  body["outputs"] = checksum_outputs(a.out, {"token_docs.jsonl"});
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
  say("normalize: " + std::to_string(docs.size()) + " docs, " + std::to_string(total_tokens) +
      " tokens -> " + join_path(a.out, "token_docs.jsonl"));
}

// ---------------------------------------------------------------------------
// train-lda

struct TrainLdaArgs {
  std::string tokens;
  std::string out;
  int k = 25;
  double alpha = -1.0;
  double beta = 0.01;
  int iterations = 1000;
  long min_count = 20;
  long min_doc_len = 10;
  std::string candidate_ks;  // comma-separated; triggers coherence selection
  int top_n = 10;
  int coherence_window = 110;
  std::optional<std::uint64_t> seed;
  int jobs = -1;
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (errno || end != item.c_str() + item.size() || item.empty())
      throw validation_error(std::string(what) + ": not an integer: '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw validation_error(std::string(what) + ": empty list");
  return out;
}

void run_train_lda(const TrainLdaArgs& a) {
  Timer timer;
  require_file(a.tokens, "token docs file");
  if (a.min_doc_len < 0) throw validation_error("--min-doc-len must be >= 0");
  const std::uint64_t seed = resolve_seed(a.seed, nullptr);
  const int jobs = resolve_jobs(a.jobs, nullptr);
  ensure_out_dir(a.out);

  const auto docs = textnorm::read_token_docs(a.tokens);
  const auto vocab =
      vocab::build_vocab(docs, a.min_count, static_cast<std::size_t>(a.min_doc_len));
  const auto bows = vocab::training_bow(docs, vocab, static_cast<std::size_t>(a.min_doc_len));

  topics::LdaConfig cfg;
  cfg.topics = a.k;
  cfg.alpha = a.alpha;
  cfg.beta = a.beta;
  cfg.iterations = a.iterations;
  cfg.seed = seed;

  std::vector<std::string> written;
  json selection_echo;
  if (!a.candidate_ks.empty()) {
    const auto candidates = parse_int_list(a.candidate_ks, "--candidate-ks");
    const auto sel = topics::select_topic_count(bows, vocab, docs, candidates, cfg,
                                                jobs == 0 ? 0 : jobs, a.top_n,
                                                a.coherence_window);
    cfg.topics = sel.best_k;
    csvio::Table t;
    t.header = {"k", "mean_coherence"};
    for (const auto& [k, score] : sel.scores)
      t.rows.push_back({std::to_string(k), csvio::format_double(score)});
    csvio::write_table(join_path(a.out, "coherence.csv"), t);
    written.push_back("coherence.csv");
    selection_echo = {{"candidates", candidates}, {"best_k", sel.best_k}};
    say("train-lda: coherence selection picked k = " + std::to_string(sel.best_k));
  }

  const auto model = topics::train_lda(bows, vocab, cfg);
  modelio::save_topic_model(join_path(a.out, "model.bin"), model);
  written.push_back("model.bin");

  csvio::Table topics_table;
  topics_table.header = {"topic", "rank", "term", "weight"};
  for (int k = 0; k < model.K; ++k) {
    const auto ids = topics::top_terms(model, k, a.top_n);
    for (std::size_t r = 0; r < ids.size(); ++r)
      topics_table.rows.push_back({std::to_string(k), std::to_string(r + 1),
                                   model.vocab.terms[static_cast<std::size_t>(ids[r])],
                                   csvio::format_double(model.phi_at(k, ids[r]))});
  }
  csvio::write_table(join_path(a.out, "topics.csv"), topics_table);
  written.push_back("topics.csv");

  csvio::Table trace;
  trace.header = {"iteration", "log_likelihood"};
  for (const auto& [iter, ll] : model.ll_trace)
    trace.rows.push_back({std::to_string(iter), csvio::format_double(ll)});
  csvio::write_table(join_path(a.out, "ll_trace.csv"), trace);
  written.push_back("ll_trace.csv");

  json body = manifest_base("train-lda", seed, jobs);
  body["inputs"] = {{a.tokens, checksum_hex(a.tokens)}};
  body["config"] = {{"k", cfg.topics},
                    {"alpha", model.alpha},
                    {"beta", cfg.beta},
                    {"iterations", cfg.iterations},
                    {"min_count", a.min_count},
                    {"min_doc_len", a.min_doc_len},
                    {"coherence_top_n", a.top_n},
                    {"coherence_window", a.coherence_window}};
  if (!selection_echo.is_null()) body["selection"] = selection_echo;
  body["counts"] = {{"docs", docs.size()},
                    {"training_docs", bows.size()},
                    {"vocabulary", vocab.terms.size()}};
  body["outputs"] = checksum_outputs(a.out, written);
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
  say("train-lda: k = " + std::to_string(model.K) + ", vocabulary " +
      std::to_string(vocab.terms.size()) + " -> " + join_path(a.out, "model.bin"));
}

// ---------------------------------------------------------------------------
// train-embeddings

struct TrainEmbArgs {
  std::string tokens;
  std::string out;
  int dim = 300;
  int window = 2;
  int epochs = 20;
  long min_count = 20;
  int negative = 5;
  double initial_lr = 0.025;
  double final_lr = 1e-4;
  long min_doc_len = 10;
  std::optional<std::uint64_t> seed;
};

void run_train_embeddings(const TrainEmbArgs& a) {
  Timer timer;
  require_file(a.tokens, "token docs file");
  if (a.min_doc_len < 0) throw validation_error("--min-doc-len must be >= 0");
  const std::uint64_t seed = resolve_seed(a.seed, nullptr);
  ensure_out_dir(a.out);

  const auto docs = textnorm::read_token_docs(a.tokens);
  embeddings::ParagraphVectorConfig cfg;
  cfg.vector_size = a.dim;
  cfg.window = a.window;
  cfg.epochs = a.epochs;
  cfg.min_count = a.min_count;
  cfg.negative_samples = a.negative;
  cfg.initial_lr = a.initial_lr;
  cfg.final_lr = a.final_lr;
  cfg.seed = seed;

  const auto model = embeddings::train_pv(docs, cfg, static_cast<std::size_t>(a.min_doc_len));
  modelio::save_pv_model(join_path(a.out, "model.bin"), model);

  csvio::Table trace;
  trace.header = {"epoch", "mean_loss"};
  for (std::size_t e = 0; e < model.loss_trace.size(); ++e)
    trace.rows.push_back({std::to_string(e + 1), csvio::format_double(model.loss_trace[e])});
  csvio::write_table(join_path(a.out, "loss_trace.csv"), trace);

  json body = manifest_base("train-embeddings", seed, 1);
  body["inputs"] = {{a.tokens, checksum_hex(a.tokens)}};
  body["config"] = {{"vector_size", cfg.vector_size}, {"window", cfg.window},
                    {"epochs", cfg.epochs},           {"min_count", cfg.min_count},
                    {"negative_samples", cfg.negative_samples},
                    {"initial_lr", cfg.initial_lr},   {"final_lr", cfg.final_lr},
                    {"min_doc_len", a.min_doc_len}};
  body["counts"] = {{"docs", docs.size()},
                    {"trained_docs", model.doc_ids.size()},
                    {"vocabulary", model.vocab.terms.size()}};
  body["outputs"] = checksum_outputs(a.out, {"model.bin", "loss_trace.csv"});
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
  say("train-embeddings: " + std::to_string(model.doc_ids.size()) + " docs, dim " +
      std::to_string(cfg.vector_size) + " -> " + join_path(a.out, "model.bin"));
}

// ---------------------------------------------------------------------------
// train-classifier

struct TrainClassifierArgs {
  std::string dataset, tokens;
  std::string kind = "forest";
  std::string features = "emb+struct";
  std::string lda_model, emb_model;
  std::string out;
  int trees = 500;
  int min_leaf = 3;
  int max_features = 0;
  double cost = 1.0;
  double gamma = 0.1;
  std::optional<std::uint64_t> seed;
  int jobs = -1;
};

void run_train_classifier(const TrainClassifierArgs& a) {
  Timer timer;
  require_file(a.dataset, "dataset file");
  require_file(a.tokens, "token docs file");
  const std::uint64_t seed = resolve_seed(a.seed, nullptr);
  const int jobs = resolve_jobs(a.jobs, nullptr);

  harness::PipelineConfig pc;
  pc.seed = seed;
  bool wants_lda = false, wants_emb = false;
  if (a.features == "lda") {
    pc.representation = harness::Representation::lda;
    pc.use_structured = false;
    wants_lda = true;
  } else if (a.features == "emb") {
    pc.representation = harness::Representation::embeddings;
    pc.use_structured = false;
    wants_emb = true;
  } else if (a.features == "lda+struct") {
    pc.representation = harness::Representation::lda;
    pc.use_structured = true;
    wants_lda = true;
  } else if (a.features == "emb+struct") {
    pc.representation = harness::Representation::embeddings;
    pc.use_structured = true;
    wants_emb = true;
  } else if (a.features == "all") {
    pc.representation = harness::Representation::both;
    pc.use_structured = true;
    wants_lda = wants_emb = true;
  } else {
    throw validation_error("--features must be lda, emb, lda+struct, emb+struct or all");
  }
  if (a.kind != "forest" && a.kind != "svm")
    throw validation_error("--kind must be forest or svm");
  if (wants_lda && a.lda_model.empty())
    throw validation_error("--features " + a.features + " requires --lda-model");
  if (wants_emb && a.emb_model.empty())
    throw validation_error("--features " + a.features + " requires --emb-model");
  if (wants_lda) require_file(a.lda_model, "topic model");
  if (wants_emb) require_file(a.emb_model, "embedding model");
  ensure_out_dir(a.out);

  const auto all_records = corpus::read_dataset(a.dataset);
  const auto filtered = corpus::filter_short(all_records);
  if (filtered.kept.empty()) throw validation_error("no records pass the word-count filter");
  const auto docs = textnorm::read_token_docs(a.tokens);

  harness::RepresentationModels models;
  if (wants_lda) models.lda = modelio::load_topic_model(a.lda_model);
  if (wants_emb) models.pv = modelio::load_pv_model(a.emb_model);

  std::vector<std::string> feature_warnings;
  const auto x = harness::build_features(models, filtered.kept, docs, pc, &feature_warnings);
  std::vector<int> y;
  y.reserve(filtered.kept.size());
  for (const auto& r : filtered.kept) y.push_back(r.label ? 1 : 0);

  modelio::ClassifierArtifact artifact;
  std::vector<std::string> written;
  if (a.kind == "forest") {
    forest::RandomForestConfig cfg;
    cfg.n_estimators = a.trees;
    cfg.min_samples_leaf = a.min_leaf;
    cfg.max_features = a.max_features;
    cfg.seed = seed;
    artifact.model = classifiers::train_forest(x, y, cfg, jobs == 0 ? 0 : jobs);

    const auto report = classifiers::feature_importances(artifact.model);
    csvio::Table imp;
    imp.header = {"rank", "feature", "importance"};
    for (std::size_t r = 0; r < report.entries.size(); ++r)
      imp.rows.push_back({std::to_string(r + 1), report.entries[r].first,
                          csvio::format_double(report.entries[r].second)});
    csvio::write_table(join_path(a.out, "importance.csv"), imp);
    written.push_back("importance.csv");
  } else {
    svm::SvmConfig cfg;
    cfg.C = a.cost;
    cfg.gamma = a.gamma;
    cfg.seed = seed;
    const auto params = features::fit_standardize(x);
    artifact.model = classifiers::train_svm(features::apply_standardize(x, params), y, cfg);
    artifact.standardize = params;
  }
  modelio::save_classifier(join_path(a.out, "model.bin"), artifact);
  written.insert(written.begin(), "model.bin");

  long positives = 0;
  for (const int v : y) positives += v;
  json body = manifest_base("train-classifier", seed, jobs);
  body["inputs"] = {{a.dataset, checksum_hex(a.dataset)}, {a.tokens, checksum_hex(a.tokens)}};
  if (wants_lda) body["inputs"][a.lda_model] = checksum_hex(a.lda_model);
  if (wants_emb) body["inputs"][a.emb_model] = checksum_hex(a.emb_model);
  body["config"] = {{"kind", a.kind}, {"features", a.features}};
  if (a.kind == "forest")
    body["config"]["forest"] = {{"n_estimators", a.trees},
                                {"min_samples_leaf", a.min_leaf},
                                {"max_features", a.max_features}};
  else
    body["config"]["svm"] = {{"C", a.cost}, {"gamma", a.gamma}};
  body["counts"] = {{"records", filtered.kept.size()},
                    {"dropped_short", filtered.dropped},
                    {"positives", positives},
                    {"feature_columns", x.names.size()}};
  if (!feature_warnings.empty()) body["warnings"] = feature_warnings;
  body["outputs"] = checksum_outputs(a.out, written);
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
  say("train-classifier: " + a.kind + " on " + std::to_string(filtered.kept.size()) +
      " records, " + std::to_string(x.names.size()) + " features -> " +
      join_path(a.out, "model.bin"));
}

// ---------------------------------------------------------------------------
// evaluate / compare

struct EvaluateArgs {
  std::string config_path;
  std::string out;
  bool svg = false;
  std::optional<std::uint64_t> seed;
  int jobs = -1;
  bool require_compare = false;  // true for the compare subcommand
};

struct EvalInputs {
  std::vector<corpus::PeriodRecord> records;  // word-count filtered
  std::vector<textnorm::TokenDoc> docs;
  json input_checksums = json::object();
  long dropped_short = 0;
  long ingest_warnings = 0;
};

EvalInputs load_eval_inputs(const runconfig::KvMap& kv, int jobs) {
  EvalInputs in;
  std::vector<corpus::PeriodRecord> assembled;
  const std::string dataset = runconfig::get_string(kv, "data.dataset", "");
  if (!dataset.empty()) {
    require_file(dataset, "dataset file");
    in.input_checksums[dataset] = checksum_hex(dataset);
    assembled = corpus::read_dataset(dataset);
  } else {
    const CorpusPaths p = resolve_corpus_paths("", "", "", "", "", kv);
    in.input_checksums[p.notes] = checksum_hex(p.notes);
    in.input_checksums[p.admissions] = checksum_hex(p.admissions);
    in.input_checksums[p.incidents] = checksum_hex(p.incidents);
    in.input_checksums[p.structured] = checksum_hex(p.structured);
    const auto raw = corpus::ingest(p.notes, p.admissions, p.incidents, p.structured);
    in.ingest_warnings = raw.warning_count;
    assembled =
        corpus::assemble_periods(raw.notes, raw.admissions, raw.incidents, raw.structured)
            .records;
  }
  auto filtered = corpus::filter_short(assembled);
  in.records = std::move(filtered.kept);
  in.dropped_short = filtered.dropped;
  if (in.records.empty()) throw validation_error("no records pass the word-count filter");

  const std::string tokens = runconfig::get_string(kv, "data.tokens", "");
  if (!tokens.empty()) {
    require_file(tokens, "token docs file");
    in.input_checksums[tokens] = checksum_hex(tokens);
    in.docs = textnorm::read_token_docs(tokens);
  } else {
    const std::string stopwords = runconfig::get_string(kv, "resources.stopwords", "");
    if (stopwords.empty())
      throw validation_error("set resources.stopwords (or data.tokens) in the config");
    require_file(stopwords, "stopword file");
    in.input_checksums[stopwords] = checksum_hex(stopwords);
    const auto res = textnorm::load_resources(stopwords);
    in.docs = normalize_records(in.records, res, jobs);
  }
  return in;
}

json pipeline_echo(const harness::PipelineConfig& pc) {
  const char* rep = pc.representation == harness::Representation::lda          ? "lda"
                    : pc.representation == harness::Representation::embeddings ? "embeddings"
                                                                               : "both";
  return json{
      {"representation", rep},
      {"classifier", pc.classifier == harness::ClassifierKind::forest ? "forest" : "svm"},
      {"use_structured", pc.use_structured},
      {"selection", pc.selection == harness::SelectionMetric::pr_auc ? "pr_auc" : "roc_auc"},
      {"k_outer", pc.k_outer},
      {"k_inner", pc.k_inner},
      {"representation_per_fold", pc.representation_per_fold},
      {"vocab_min_count", pc.vocab_min_count},
      {"min_doc_len", pc.min_doc_len},
      {"forest_grid_cells", pc.forest_grid.size()},
      {"forest_n_estimators", pc.forest_grid.empty() ? 0 : pc.forest_grid.front().n_estimators},
      {"svm_grid_cells", pc.svm_grid.size()},
      {"lda", {{"topics", pc.lda.topics}, {"alpha", pc.lda.alpha}, {"beta", pc.lda.beta},
               {"iterations", pc.lda.iterations}, {"seed", pc.lda.seed}}},
      {"pv", {{"vector_size", pc.pv.vector_size}, {"window", pc.pv.window},
              {"min_count", pc.pv.min_count}, {"epochs", pc.pv.epochs},
              {"negative_samples", pc.pv.negative_samples}, {"initial_lr", pc.pv.initial_lr},
              {"final_lr", pc.pv.final_lr}, {"seed", pc.pv.seed}}}};
}

void summarize_run(const char* tag, const harness::NestedCvResult& run) {
  say(std::string(tag) + ": pr_auc " + fmt4(run.summary.pr_auc.mean) + " +/- " +
      fmt4(run.summary.pr_auc.stddev) + ", roc_auc " + fmt4(run.summary.roc_auc.mean) +
      " +/- " + fmt4(run.summary.roc_auc.stddev) + ", f2_max " +
      fmt4(run.summary.f2_max.mean));
  for (const auto& w : run.warnings) say_verbose(std::string("  warning: ") + w);
}

void run_evaluate(const EvaluateArgs& a) {
  Timer timer;
  require_file(a.config_path, "config file");
  const runconfig::KvMap kv = runconfig::parse_config_file(a.config_path);
  const std::uint64_t seed = resolve_seed(a.seed, &kv);
  const int jobs = resolve_jobs(a.jobs, &kv);
  const bool with_compare = a.require_compare || runconfig::has_compare_keys(kv);
  if (a.require_compare && !runconfig::has_compare_keys(kv))
    throw validation_error("compare needs compare.* keys in the config");
  ensure_out_dir(a.out);

  EvalInputs in = load_eval_inputs(kv, jobs);
  in.input_checksums[a.config_path] = checksum_hex(a.config_path);
  say("evaluate: " + std::to_string(in.records.size()) + " records (" +
      std::to_string(in.dropped_short) + " dropped short)");

  const harness::PipelineConfig pc = runconfig::pipeline_from(kv, seed);
  const auto run_a = harness::nested_cv(in.records, in.docs, pc, jobs == 0 ? 0 : jobs);
  summarize_run("run_a", run_a);

  std::vector<std::string> written;
  write_summary_csv(join_path(a.out, "summary.csv"), run_a);
  written.push_back("summary.csv");
  write_scores_csv(join_path(a.out, "scores.csv"), run_a);
  written.push_back("scores.csv");

  std::vector<double> scores;
  std::vector<int> labels;
  pooled_scores(run_a, scores, labels);
  write_curve_csv(join_path(a.out, "pr_curve.csv"), metrics::pr_curve(scores, labels), "recall",
                  "precision");
  written.push_back("pr_curve.csv");
  write_curve_csv(join_path(a.out, "roc_curve.csv"), metrics::roc_curve(scores, labels), "fpr",
                  "tpr");
  written.push_back("roc_curve.csv");
  write_histograms_csv(join_path(a.out, "histograms.csv"), synthgen::describe(in.records));
  written.push_back("histograms.csv");
  if (pc.classifier == harness::ClassifierKind::forest)
    write_importance_csvs(a.out, run_a, "", written);

  json body = manifest_base(a.require_compare ? "compare" : "evaluate", seed, jobs);
  body["config"] = json::object();
  for (const auto& [k, v] : kv) body["config"][k] = v;
  body["pipeline"] = pipeline_echo(pc);
  body["inputs"] = in.input_checksums;
  body["counts"] = {{"records", in.records.size()},
                    {"dropped_short", in.dropped_short},
                    {"malformed_lines_skipped", in.ingest_warnings}};
  body["summary"] = summary_to_json(run_a.summary);
  if (!run_a.warnings.empty()) body["harness_warnings"] = run_a.warnings;

  if (with_compare) {
    const harness::PipelineConfig pb = runconfig::compare_pipeline_from(kv, seed);
    const auto run_b = harness::nested_cv(in.records, in.docs, pb, jobs == 0 ? 0 : jobs);
    summarize_run("run_b", run_b);
    write_summary_csv(join_path(a.out, "summary_b.csv"), run_b);
    written.push_back("summary_b.csv");
    write_scores_csv(join_path(a.out, "scores_b.csv"), run_b);
    written.push_back("scores_b.csv");
    if (pb.classifier == harness::ClassifierKind::forest)
      write_importance_csvs(a.out, run_b, "_b", written);

    const auto report = harness::compare_classifiers(run_a, run_b);
    csvio::Table kt;
    kt.header = {"fold", "kappa"};
    for (std::size_t f = 0; f < report.kappa.per_fold.size(); ++f)
      kt.rows.push_back({std::to_string(f), csvio::format_double(report.kappa.per_fold[f])});
    kt.rows.push_back({"mean", csvio::format_double(report.kappa.mean)});
    csvio::write_table(join_path(a.out, "kappa.csv"), kt);
    written.push_back("kappa.csv");

    csvio::Table st;
    st.header = {"threshold", "kappa", "defined"};
    for (const auto& p : report.sweep)
      st.rows.push_back({csvio::format_double(p.threshold),
                         p.defined ? csvio::format_double(p.kappa) : "",
                         p.defined ? "1" : "0"});
    csvio::write_table(join_path(a.out, "kappa_sweep.csv"), st);
    written.push_back("kappa_sweep.csv");

    body["pipeline_b"] = pipeline_echo(pb);
    body["summary_b"] = summary_to_json(run_b.summary);
    if (!run_b.warnings.empty()) body["harness_warnings_b"] = run_b.warnings;
    body["kappa"] = {{"mean", report.kappa.mean},
                     {"stddev", report.kappa.stddev},
                     {"per_fold", report.kappa.per_fold},
                     {"threshold_a", report.threshold_a},
                     {"threshold_b", report.threshold_b}};
    say("kappa: " + fmt4(report.kappa.mean) + " +/- " + fmt4(report.kappa.stddev) +
        " at thresholds " + fmt4(report.threshold_a) + " / " + fmt4(report.threshold_b));
  }

  if (a.svg) {
    const auto svgs = render_svgs(a.out, a.out);
    written.insert(written.end(), svgs.begin(), svgs.end());
  }
  body["outputs"] = checksum_outputs(a.out, written);
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(a.out, std::move(body));
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string in;
  std::string out;  // defaults to --in
};

void run_report(const ReportArgs& a) {
  Timer timer;
  if (!fs::is_directory(a.in)) throw validation_error("--in directory not found: " + a.in);
  const std::string out = a.out.empty() ? a.in : a.out;
  ensure_out_dir(out);
  const auto written = render_svgs(a.in, out);
  if (written.empty())
    throw validation_error("no renderable CSVs (pr_curve, roc_curve, kappa_sweep, histograms) in " +
                           a.in);

  json body = manifest_base("report", 0, 1);
  body.erase("seed");
  body["inputs"] = json::object();
  for (const char* name : {"pr_curve.csv", "roc_curve.csv", "kappa_sweep.csv", "histograms.csv"}) {
    const std::string p = join_path(a.in, name);
    if (fs::is_regular_file(p)) body["inputs"][p] = checksum_hex(p);
  }
  body["outputs"] = checksum_outputs(out, written);
  body["wall_time_seconds"] = timer.seconds();
  write_run_manifest(out, std::move(body));
  say("report: " + std::to_string(written.size()) + " SVG files -> " + out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"notewatch: violence-risk document classification pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every subcommand");

  int verbose_count = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose_count, "print warnings and extra progress detail");
  app.add_flag("-q,--quiet", quiet, "print errors only");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--scale", synth_args.scale, "dataset size as a fraction of the full shape");
  synth->add_option("--config", synth_args.config_path, "config file with synth.* overrides");
  synth->add_option("--jobs", synth_args.jobs, "worker threads (0 = all cores)");
  std::uint64_t synth_seed = 0;
  synth->add_option("--seed", synth_seed, "generator seed");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "assemble admission periods from corpus files");
  ingest->add_option("--dir", ingest_args.dir, "directory holding the four corpus files");
  ingest->add_option("--notes", ingest_args.notes, "notes JSONL path");
  ingest->add_option("--admissions", ingest_args.admissions, "admissions JSONL path");
  ingest->add_option("--incidents", ingest_args.incidents, "incidents JSONL path");
  ingest->add_option("--structured", ingest_args.structured, "structured JSONL path");
  ingest->add_option("--config", ingest_args.config_path, "config file with data.* paths");
  ingest->add_option("--out", ingest_args.out, "output directory")->required();

  NormalizeArgs norm_args;
  auto* normalize = app.add_subcommand("normalize", "tokenize, fold, stem a dataset's notes");
  normalize->add_option("--in", norm_args.in, "dataset.jsonl from ingest");
  normalize->add_option("--stopwords", norm_args.stopwords, "stopword list, one per line");
  normalize->add_option("--config", norm_args.config_path, "config file with paths");
  normalize->add_option("--jobs", norm_args.jobs, "worker threads (0 = all cores)");
  normalize->add_option("--out", norm_args.out, "output directory")->required();

  TrainLdaArgs lda_args;
  auto* train_lda = app.add_subcommand("train-lda", "train a topic model on token docs");
  train_lda->add_option("--tokens", lda_args.tokens, "token_docs.jsonl from normalize")
      ->required();
  train_lda->add_option("--k", lda_args.k, "topic count");
  train_lda->add_option("--alpha", lda_args.alpha, "document-topic prior (<=0 = 5/k)");
  train_lda->add_option("--beta", lda_args.beta, "topic-term prior");
  train_lda->add_option("--iters", lda_args.iterations, "Gibbs sweeps");
  train_lda->add_option("--min-count", lda_args.min_count, "vocabulary frequency floor");
  train_lda->add_option("--min-doc-len", lda_args.min_doc_len, "shortest training doc");
  train_lda->add_option("--candidate-ks", lda_args.candidate_ks,
                        "comma-separated topic counts; picks the most coherent");
  train_lda->add_option("--top-n", lda_args.top_n, "top terms per topic for export/coherence");
  train_lda->add_option("--coherence-window", lda_args.coherence_window,
                        "sliding window width for coherence");
  std::uint64_t lda_seed = 0;
  train_lda->add_option("--seed", lda_seed, "sampler seed");
  train_lda->add_option("--jobs", lda_args.jobs, "worker threads (0 = all cores)");
  train_lda->add_option("--out", lda_args.out, "output directory")->required();

  TrainEmbArgs emb_args;
  auto* train_emb = app.add_subcommand("train-embeddings", "train paragraph vectors");
  train_emb->add_option("--tokens", emb_args.tokens, "token_docs.jsonl from normalize")
      ->required();
  train_emb->add_option("--dim", emb_args.dim, "vector size");
  train_emb->add_option("--window", emb_args.window, "context words each side");
  train_emb->add_option("--epochs", emb_args.epochs, "training epochs");
  train_emb->add_option("--min-count", emb_args.min_count, "vocabulary frequency floor");
  train_emb->add_option("--negative", emb_args.negative, "negative samples per step");
  train_emb->add_option("--initial-lr", emb_args.initial_lr, "starting learning rate");
  train_emb->add_option("--final-lr", emb_args.final_lr, "final learning rate");
  train_emb->add_option("--min-doc-len", emb_args.min_doc_len, "shortest training doc");
  std::uint64_t emb_seed = 0;
  train_emb->add_option("--seed", emb_seed, "trainer seed");
  train_emb->add_option("--out", emb_args.out, "output directory")->required();

  TrainClassifierArgs clf_args;
  auto* train_clf = app.add_subcommand("train-classifier", "fit one classifier on a dataset");
  train_clf->add_option("--dataset", clf_args.dataset, "dataset.jsonl from ingest")->required();
  train_clf->add_option("--tokens", clf_args.tokens, "token_docs.jsonl from normalize")
      ->required();
  train_clf->add_option("--kind", clf_args.kind, "forest or svm");
  train_clf->add_option("--features", clf_args.features,
                        "lda, emb, lda+struct, emb+struct or all");
  train_clf->add_option("--lda-model", clf_args.lda_model, "trained topic model");
  train_clf->add_option("--emb-model", clf_args.emb_model, "trained embedding model");
  train_clf->add_option("--trees", clf_args.trees, "forest size");
  train_clf->add_option("--min-leaf", clf_args.min_leaf, "minimum weighted samples per leaf");
  train_clf->add_option("--max-features", clf_args.max_features,
                        "columns tried per split (0 = sqrt)");
  train_clf->add_option("--cost", clf_args.cost, "svm C");
  train_clf->add_option("--gamma", clf_args.gamma, "svm RBF gamma");
  std::uint64_t clf_seed = 0;
  train_clf->add_option("--seed", clf_seed, "training seed");
  train_clf->add_option("--jobs", clf_args.jobs, "worker threads (0 = all cores)");
  train_clf->add_option("--out", clf_args.out, "output directory")->required();

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "nested cross-validation with artifacts");
  evaluate->add_option("--config", eval_args.config_path, "run configuration file")->required();
  evaluate->add_option("--out", eval_args.out, "output directory")->required();
  evaluate->add_flag("--svg", eval_args.svg, "also render SVG plots from the CSVs");
  std::uint64_t eval_seed = 0;
  evaluate->add_option("--seed", eval_seed, "override the run seed");
  evaluate->add_option("--jobs", eval_args.jobs, "worker threads (0 = all cores)");

  EvaluateArgs cmp_args;
  cmp_args.require_compare = true;
  auto* compare = app.add_subcommand("compare", "evaluate two pipelines and their agreement");
  compare->add_option("--config", cmp_args.config_path, "run configuration with compare.* keys")
      ->required();
  compare->add_option("--out", cmp_args.out, "output directory")->required();
  compare->add_flag("--svg", cmp_args.svg, "also render SVG plots from the CSVs");
  std::uint64_t cmp_seed = 0;
  compare->add_option("--seed", cmp_seed, "override the run seed");
  compare->add_option("--jobs", cmp_args.jobs, "worker threads (0 = all cores)");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "render SVG plots from exported CSVs");
  report->add_option("--in", report_args.in, "evaluate/compare output directory")->required();
  report->add_option("--out", report_args.out, "SVG directory (defaults to --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  g_verbosity = quiet ? 0 : (verbose_count > 0 ? 2 : 1);

  try {
    if (synth->parsed()) {
      if (synth->count("--seed")) synth_args.seed = synth_seed;
      run_synth(synth_args);
    } else if (ingest->parsed()) {
      run_ingest(ingest_args);
    } else if (normalize->parsed()) {
      run_normalize(norm_args);
    } else if (train_lda->parsed()) {
      if (train_lda->count("--seed")) lda_args.seed = lda_seed;
      run_train_lda(lda_args);
    } else if (train_emb->parsed()) {
      if (train_emb->count("--seed")) emb_args.seed = emb_seed;
      run_train_embeddings(emb_args);
    } else if (train_clf->parsed()) {
      if (train_clf->count("--seed")) clf_args.seed = clf_seed;
      run_train_classifier(clf_args);
    } else if (evaluate->parsed()) {
      if (evaluate->count("--seed")) eval_args.seed = eval_seed;
      run_evaluate(eval_args);
    } else if (compare->parsed()) {
      if (compare->count("--seed")) cmp_args.seed = cmp_seed;
      run_evaluate(cmp_args);
    } else if (report->parsed()) {
      run_report(report_args);
    }
    return 0;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
