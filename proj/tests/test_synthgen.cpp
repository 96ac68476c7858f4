#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "notewatch/common.hpp"
#include "notewatch/corpus.hpp"
#include "notewatch/harness.hpp"
#include "notewatch/synthgen.hpp"
#include "notewatch/textnorm.hpp"
#include "notewatch/timeutil.hpp"
#include "notewatch/vocab.hpp"

using namespace notewatch;
using namespace notewatch::synthgen;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string resource(const std::string& rel) {
  return std::string(NOTEWATCH_SOURCE_DIR) + "/" + rel;
}

SynthConfig small_config() {
  SynthConfig c;
  c.n_patients = 40;
  c.n_periods = 60;
  c.positive_fraction = 0.25;
  c.vocab_size = 120;
  c.n_true_topics = 3;
  c.association = 0.8;
  c.words_positive = {200.0, 40.0};
  c.words_negative = {150.0, 30.0};
  c.seed = 5;
  return c;
}

double mean_where(const std::vector<double>& v, const std::vector<int>& labels, int want) {
  double sum = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (labels[i] == want) {
      sum += v[i];
      ++n;
    }
  }
  REQUIRE(n > 0);
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("configuration validation rejects infeasible settings") {
  const SynthConfig quarter = scaled_config(0.25);
  CHECK(quarter.n_patients == 723);
  CHECK(quarter.n_periods == 1070);
  const SynthConfig defaults;
  CHECK(defaults.n_patients == quarter.n_patients);
  CHECK(defaults.n_periods == quarter.n_periods);
  CHECK(scaled_config(1.0).n_periods == 4280);
  CHECK_THROWS_AS(scaled_config(0.0), validation_error);
  CHECK_THROWS_AS(scaled_config(-1.0), validation_error);

  auto broken = [](auto mutate) {
    SynthConfig c = small_config();
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.vocab_size = 10 * c.n_true_topics - 1; })),
                  validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.positive_fraction = 0.0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.positive_fraction = 1.0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.association = -0.1; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.association = 1.1; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.n_periods = 1; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.n_patients = 0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.n_true_topics = 0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.age_positive.mean = 10.0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.age_negative.sd = -1.0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.words_positive.mean = 50.0; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.stopword_rate = 0.95; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.suffix_rate = 1.5; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.short_fraction = 0.6; })), validation_error);
  CHECK_THROWS_AS(generate(broken([](SynthConfig& c) { c.doc_alpha = 0.0; })), validation_error);
  CHECK_THROWS_AS(generate(small_config(), 0), validation_error);
}

TEST_CASE("planted vocabulary is distinct, stem-distinct and stopword-free") {
  const SynthConfig c = small_config();
  const SynthDataset ds = generate(c);
  REQUIRE(static_cast<long>(ds.vocabulary.size()) == c.vocab_size);

  const auto res = textnorm::load_resources(resource("resources/stopwords_nl.txt"));
  std::set<std::string> forms, stems;
  for (const auto& word : ds.vocabulary) {
    CHECK(!word.empty());
    CHECK(word.size() <= 12);
    for (char ch : word) CHECK((ch >= 'a' && ch <= 'z'));
    CHECK(res.stopwords.count(word) == 0);
    const std::string st = textnorm::stem(word);
    CHECK(!st.empty());
    CHECK(res.stopwords.count(st) == 0);
    forms.insert(word);
    stems.insert(st);
  }
  CHECK(static_cast<long>(forms.size()) == c.vocab_size);
  CHECK(static_cast<long>(stems.size()) == c.vocab_size);

  SynthConfig other = c;
  other.seed = c.seed + 1;
  CHECK(generate(other).vocabulary != ds.vocabulary);
}

TEST_CASE("generated corpus has the planned shape, spacing and label mechanics") {
  const SynthConfig c = small_config();
  const SynthDataset ds = generate(c);
  const auto n = static_cast<std::size_t>(c.n_periods);
  REQUIRE(ds.admissions.size() == n);
  REQUIRE(ds.structured.size() == n);
  REQUIRE(ds.labels.size() == n);
  REQUIRE(ds.planted_topic_weight.size() == n);
  REQUIRE(ds.word_counts.size() == n);

  // period ids are unique, sorted, and shared with the structured rows
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(ds.structured[i].period_id == ds.admissions[i].period_id);
    if (i > 0) CHECK(ds.admissions[i - 1].period_id < ds.admissions[i].period_id);
  }

  const long n_pos = std::count(ds.labels.begin(), ds.labels.end(), 1);
  CHECK(n_pos == std::lround(c.positive_fraction * static_cast<double>(c.n_periods)));
  CHECK(ds.stats.n_positive == n_pos);
  CHECK(ds.stats.n_periods == c.n_periods);

  // periods of one patient stay at least 70 days apart, minute-aligned
  std::unordered_map<std::string, std::vector<std::int64_t>> starts_by_patient;
  for (const auto& adm : ds.admissions) {
    CHECK(adm.start % 60 == 0);
    CHECK(adm.sub_department.rfind("dept", 0) == 0);
    if (adm.end) CHECK(*adm.end >= adm.start);
    starts_by_patient[adm.patient_id].push_back(adm.start);
  }
  CHECK(static_cast<long>(starts_by_patient.size()) == ds.stats.n_patients);
  for (auto& [patient, starts] : starts_by_patient) {
    std::sort(starts.begin(), starts.end());
    for (std::size_t i = 1; i < starts.size(); ++i)
      CHECK(starts[i] - starts[i - 1] >= 70 * kSecondsPerDay);
  }

  // every note falls in exactly one of its patient's period windows, and the
  // window word totals match the planned counts
  std::unordered_map<std::string, std::vector<std::size_t>> periods_by_patient;
  for (std::size_t i = 0; i < n; ++i) periods_by_patient[ds.admissions[i].patient_id].push_back(i);
  std::vector<long> window_words(n, 0);
  std::vector<long> window_notes(n, 0);
  for (const auto& note : ds.notes) {
    CHECK(note.timestamp % 60 == 0);
    long owners = 0;
    for (std::size_t i : periods_by_patient[note.patient_id]) {
      const std::int64_t start = ds.admissions[i].start;
      if (note.timestamp >= start - 28 * kSecondsPerDay &&
          note.timestamp <= start + kSecondsPerDay) {
        ++owners;
        window_words[i] += corpus::count_words(note.text);
        ++window_notes[i];
      }
    }
    CHECK(owners == 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(window_words[i] == ds.word_counts[i]);
    CHECK(window_notes[i] >= 1);
    CHECK(window_notes[i] <= 6);
  }

  // an incident sits in (start+1d, start+28d] exactly for positive periods
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t start = ds.admissions[i].start;
    bool hit = false;
    for (const auto& inc : ds.incidents) {
      if (inc.patient_id != ds.admissions[i].patient_id) continue;
      if (inc.timestamp > start + kSecondsPerDay && inc.timestamp <= start + 28 * kSecondsPerDay)
        hit = true;
    }
    CHECK(hit == (ds.labels[i] == 1));
  }

  // planted class skews: topic weight up, age down for positives
  std::vector<double> ages(n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(ds.planted_topic_weight[i] >= 0.0);
    CHECK(ds.planted_topic_weight[i] <= 1.0);
    ages[i] = ds.structured[i].age_admission;
    CHECK(ages[i] >= 18.0);
    CHECK(ages[i] <= 90.0);
  }
  CHECK(mean_where(ds.planted_topic_weight, ds.labels, 1) -
            mean_where(ds.planted_topic_weight, ds.labels, 0) >
        0.4);
  CHECK(mean_where(ages, ds.labels, 0) - mean_where(ages, ds.labels, 1) > 5.0);

  // one gender per patient
  std::unordered_map<std::string, std::set<std::string>> genders;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK((ds.structured[i].gender == "M" || ds.structured[i].gender == "F"));
    genders[ds.admissions[i].patient_id].insert(ds.structured[i].gender);
  }
  for (const auto& [patient, seen] : genders) CHECK(seen.size() == 1);

  // realized statistics agree with direct recomputation
  double age_pos = 0.0, age_neg = 0.0, words_pos = 0.0, words_neg = 0.0;
  long total_words = 0, shorts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    (ds.labels[i] == 1 ? age_pos : age_neg) += ages[i];
    (ds.labels[i] == 1 ? words_pos : words_neg) += static_cast<double>(ds.word_counts[i]);
    total_words += ds.word_counts[i];
    if (ds.word_counts[i] <= 100) ++shorts;
  }
  CHECK(ds.stats.mean_age_positive ==
        doctest::Approx(age_pos / static_cast<double>(n_pos)).epsilon(1e-12));
  CHECK(ds.stats.mean_age_negative ==
        doctest::Approx(age_neg / static_cast<double>(c.n_periods - n_pos)).epsilon(1e-12));
  CHECK(ds.stats.mean_words_positive ==
        doctest::Approx(words_pos / static_cast<double>(n_pos)).epsilon(1e-12));
  CHECK(ds.stats.mean_words_negative ==
        doctest::Approx(words_neg / static_cast<double>(c.n_periods - n_pos)).epsilon(1e-12));
  CHECK(ds.stats.total_words == total_words);
  CHECK(ds.stats.short_periods == shorts);
  CHECK(ds.stats.n_notes == static_cast<long>(ds.notes.size()));
  CHECK(ds.stats.n_incidents == static_cast<long>(ds.incidents.size()));
}

TEST_CASE("written corpus round trips through ingestion with zero warnings") {
  const SynthConfig c = small_config();
  const SynthDataset ds = generate(c);
  TempDir tmp("notewatch_synthgen_roundtrip");
  write_corpus(ds, tmp.path.string());

  const auto raw = corpus::ingest(tmp.sub("notes.jsonl"), tmp.sub("admissions.jsonl"),
                                  tmp.sub("incidents.jsonl"), tmp.sub("structured.jsonl"));
  CHECK(raw.warning_count == 0);
  CHECK(raw.notes.size() == ds.notes.size());
  CHECK(raw.admissions.size() == ds.admissions.size());
  CHECK(raw.incidents.size() == ds.incidents.size());
  CHECK(raw.structured.size() == ds.structured.size());

  const auto assembled = corpus::assemble_periods(raw.notes, raw.admissions, raw.incidents, raw.structured);
  REQUIRE(assembled.records.size() == ds.admissions.size());
  CHECK(assembled.empty_note_periods == 0);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.admissions.size(); ++i) index[ds.admissions[i].period_id] = i;
  for (const auto& rec : assembled.records) {
    REQUIRE(index.count(rec.period_id) == 1);
    const std::size_t i = index[rec.period_id];
    CHECK(rec.patient_id == ds.admissions[i].patient_id);
    CHECK(rec.label == (ds.labels[i] == 1));
    CHECK(rec.word_count == ds.word_counts[i]);
    CHECK(rec.structured.num_words == rec.word_count);
    CHECK(rec.structured.age_admission == ds.structured[i].age_admission);
    CHECK(rec.structured.gender == ds.structured[i].gender);
    CHECK(rec.structured.n_meds_prescribed == ds.structured[i].n_meds_prescribed);
    CHECK(rec.structured.n_meds_administered == ds.structured[i].n_meds_administered);
    CHECK(rec.structured.has_diagnosis == ds.structured[i].has_diagnosis);
    const int hour = static_cast<int>((ds.admissions[i].start / 3600) % 24);
    CHECK(rec.structured.admission_start_hour == hour);
    CHECK(rec.note_count >= 1);
    CHECK(rec.note_count <= 6);
    const std::int64_t start = ds.admissions[i].start;
    CHECK(rec.structured.first_note_ts >= start - 28 * kSecondsPerDay);
    CHECK(rec.structured.last_note_ts <= start + kSecondsPerDay);
    CHECK(rec.structured.first_note_ts <= rec.structured.last_note_ts);
  }

  const auto filtered = corpus::filter_short(assembled.records);
  CHECK(filtered.dropped == ds.stats.short_periods);
  CHECK(static_cast<long>(filtered.kept.size()) + filtered.dropped ==
        static_cast<long>(assembled.records.size()));
  for (const auto& rec : filtered.kept) CHECK(rec.word_count > 100);

  const DatasetReport report = describe(assembled.records);
  CHECK(report.n_periods == c.n_periods);
  CHECK(report.n_positive == ds.stats.n_positive);
  CHECK(report.n_patients == ds.stats.n_patients);
  CHECK(report.prevalence == doctest::Approx(ds.stats.positive_fraction).epsilon(1e-12));
  CHECK(report.positive.mean_age == doctest::Approx(ds.stats.mean_age_positive).epsilon(1e-12));
  CHECK(report.negative.mean_age == doctest::Approx(ds.stats.mean_age_negative).epsilon(1e-12));
  CHECK(report.positive.mean_words == doctest::Approx(ds.stats.mean_words_positive).epsilon(1e-12));
  CHECK(report.negative.mean_words == doctest::Approx(ds.stats.mean_words_negative).epsilon(1e-12));
}

TEST_CASE("same seed produces byte-identical files regardless of jobs") {
  const SynthConfig c = small_config();
  TempDir tmp("notewatch_synthgen_determinism");
  write_corpus(generate(c), tmp.sub("a"));
  write_corpus(generate(c), tmp.sub("b"));
  write_corpus(generate(c, 3), tmp.sub("j"));

  const char* names[] = {"notes.jsonl", "admissions.jsonl", "incidents.jsonl",
                         "structured.jsonl", "manifest.json"};
  for (const char* name : names) {
    const std::string a = read_file(tmp.sub("a") + "/" + name);
    CHECK(a == read_file(tmp.sub("b") + "/" + name));
    CHECK(a == read_file(tmp.sub("j") + "/" + name));
    CHECK(!a.empty());
  }

  SynthConfig other = c;
  other.seed = c.seed + 1;
  write_corpus(generate(other), tmp.sub("s"));
  CHECK(read_file(tmp.sub("a") + "/notes.jsonl") != read_file(tmp.sub("s") + "/notes.jsonl"));

  // manifest checksums match the emitted bytes
  const std::string manifest = read_file(tmp.sub("a") + "/manifest.json");
  for (const char* name : {"notes.jsonl", "admissions.jsonl", "incidents.jsonl", "structured.jsonl"}) {
    const std::uint64_t h = fnv1a64(read_file(tmp.sub("a") + "/" + name));
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    CHECK(manifest.find(hex) != std::string::npos);
  }
  CHECK(manifest.find("\"seed\": 5") != std::string::npos);
}

TEST_CASE("quarter-scale defaults hit the target prevalence and length profile") {
  SynthConfig c = scaled_config(0.25);
  c.seed = 11;
  const SynthDataset ds = generate(c);
  CHECK(ds.stats.n_periods == 1070);
  CHECK(ds.stats.n_positive == 106);
  CHECK(std::abs(ds.stats.positive_fraction - 0.0993) < 0.01);

  long over_100 = 0;
  for (long w : ds.word_counts) over_100 += w > 100 ? 1 : 0;
  const double frac_over = static_cast<double>(over_100) / static_cast<double>(c.n_periods);
  CHECK(frac_over >= 0.95);
  CHECK(ds.stats.short_periods > 0);
  CHECK(static_cast<double>(ds.stats.short_periods) / static_cast<double>(c.n_periods) < 0.06);

  CHECK(ds.stats.mean_age_positive < ds.stats.mean_age_negative);
  CHECK(ds.stats.mean_words_positive > ds.stats.mean_words_negative);

  // planted-topic weight correlates with the label: point-biserial t test
  const double n = static_cast<double>(c.n_periods);
  const double n1 = static_cast<double>(ds.stats.n_positive);
  const double n0 = n - n1;
  const double m1 = mean_where(ds.planted_topic_weight, ds.labels, 1);
  const double m0 = mean_where(ds.planted_topic_weight, ds.labels, 0);
  double ss = 0.0, total = 0.0;
  for (double w : ds.planted_topic_weight) total += w;
  const double grand = total / n;
  for (double w : ds.planted_topic_weight) ss += (w - grand) * (w - grand);
  const double sd = std::sqrt(ss / n);
  const double r = (m1 - m0) / sd * std::sqrt(n1 * n0 / (n * n));
  CHECK(r > 0.0);
  const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
  CHECK(t > 2.33);  // one-sided p < 0.01

  // the full-size corpus ingests cleanly and keeps nearly all periods
  TempDir tmp("notewatch_synthgen_quarter");
  write_corpus(ds, tmp.path.string());
  const auto raw = corpus::ingest(tmp.sub("notes.jsonl"), tmp.sub("admissions.jsonl"),
                                  tmp.sub("incidents.jsonl"), tmp.sub("structured.jsonl"));
  CHECK(raw.warning_count == 0);
  const auto assembled = corpus::assemble_periods(raw.notes, raw.admissions, raw.incidents, raw.structured);
  REQUIRE(assembled.records.size() == static_cast<std::size_t>(c.n_periods));
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.admissions.size(); ++i) index[ds.admissions[i].period_id] = i;
  for (const auto& rec : assembled.records)
    CHECK(rec.label == (ds.labels[index[rec.period_id]] == 1));
  const auto filtered = corpus::filter_short(assembled.records);
  CHECK(static_cast<double>(filtered.kept.size()) >= 0.94 * static_cast<double>(c.n_periods));
}

TEST_CASE("generated text survives normalization with the planted vocabulary") {
  const SynthConfig c = small_config();
  const SynthDataset ds = generate(c);
  const auto res = textnorm::load_resources(resource("resources/stopwords_nl.txt"));

  std::set<std::string> vocab_stems;
  for (const auto& word : ds.vocabulary) vocab_stems.insert(textnorm::stem(word));

  long raw_words = 0, kept_tokens = 0, in_vocab = 0;
  std::vector<textnorm::TokenDoc> docs;
  for (const auto& note : ds.notes) {
    raw_words += corpus::count_words(note.text);
    textnorm::TokenDoc doc;
    doc.doc_id = note.note_id;
    doc.tokens = textnorm::normalize(note.text, res);
    CHECK(!doc.tokens.empty());
    for (const auto& tok : doc.tokens) {
      CHECK(res.stopwords.count(tok) == 0);
      for (char ch : tok) CHECK((ch >= 'a' && ch <= 'z'));
      ++kept_tokens;
      in_vocab += vocab_stems.count(tok) ? 1 : 0;
    }
    docs.push_back(std::move(doc));
  }
  // stopword injection is removed by normalization, everything else survives
  const double kept_frac = static_cast<double>(kept_tokens) / static_cast<double>(raw_words);
  CHECK(kept_frac > 1.0 - c.stopword_rate - 0.08);
  CHECK(kept_frac < 1.0 - c.stopword_rate + 0.08);
  // suffixed variants overwhelmingly stem back onto planted vocabulary stems
  CHECK(static_cast<double>(in_vocab) / static_cast<double>(kept_tokens) >
        1.0 - c.suffix_rate - 0.02);

  const auto v = vocab::build_vocab(docs, 5, 5);
  CHECK(v.size() >= 90);
  CHECK(v.size() <= 170);
}

TEST_CASE("describe reports hand-checked statistics and zeroes on empty input") {
  auto rec = [](const char* pid, const char* pat, bool label, double age, long words) {
    corpus::PeriodRecord r;
    r.period_id = pid;
    r.patient_id = pat;
    r.label = label;
    r.structured.age_admission = age;
    r.word_count = words;
    r.structured.num_words = words;
    return r;
  };
  const std::vector<corpus::PeriodRecord> records = {
      rec("p1", "a", true, 30.0, 150),  rec("p2", "a", false, 50.0, 350),
      rec("p3", "b", false, 40.0, 250), rec("p4", "c", true, 20.0, 1999),
      rec("p5", "c", false, 97.0, 5000), rec("p6", "d", false, 12.0, 50),
  };
  const DatasetReport report = describe(records);
  CHECK(report.n_periods == 6);
  CHECK(report.n_patients == 4);
  CHECK(report.n_positive == 2);
  CHECK(report.prevalence == doctest::Approx(2.0 / 6.0).epsilon(1e-12));

  CHECK(report.positive.n == 2);
  CHECK(report.positive.mean_age == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(report.positive.mean_words == doctest::Approx((150.0 + 1999.0) / 2.0).epsilon(1e-12));
  REQUIRE(report.positive.ages.counts.size() == 16);
  REQUIRE(report.positive.words.counts.size() == 20);
  CHECK(report.positive.ages.counts[3] == 1);   // age 30 -> [30, 35)
  CHECK(report.positive.ages.counts[1] == 1);   // age 20 -> [20, 25)
  CHECK(report.positive.words.counts[1] == 1);  // 150 -> [100, 200)
  CHECK(report.positive.words.counts[19] == 1); // 1999 -> top bin

  CHECK(report.negative.n == 4);
  CHECK(report.negative.mean_age == doctest::Approx((50.0 + 40.0 + 97.0 + 12.0) / 4.0).epsilon(1e-12));
  CHECK(report.negative.mean_words == doctest::Approx((350.0 + 250.0 + 5000.0 + 50.0) / 4.0).epsilon(1e-12));
  CHECK(report.negative.ages.counts[7] == 1);   // age 50
  CHECK(report.negative.ages.counts[5] == 1);   // age 40
  CHECK(report.negative.ages.counts[15] == 1);  // age 97 clamps into the top bin
  CHECK(report.negative.ages.counts[0] == 1);   // age 12 clamps into the bottom bin
  CHECK(report.negative.words.counts[3] == 1);  // 350
  CHECK(report.negative.words.counts[2] == 1);  // 250
  CHECK(report.negative.words.counts[19] == 1); // 5000 clamps
  CHECK(report.negative.words.counts[0] == 1);  // 50

  const DatasetReport empty = describe({});
  CHECK(empty.n_periods == 0);
  CHECK(empty.n_patients == 0);
  CHECK(empty.n_positive == 0);
  CHECK(empty.prevalence == 0.0);
  CHECK(empty.positive.n == 0);
  CHECK(empty.positive.mean_age == 0.0);
  REQUIRE(empty.positive.ages.counts.size() == 16);
  for (long count : empty.positive.ages.counts) CHECK(count == 0);
  for (long count : empty.negative.words.counts) CHECK(count == 0);
}

TEST_CASE("association zero with equal class distributions leaves no signal") {
  SynthConfig c;
  c.n_patients = 60;
  c.n_periods = 150;
  c.positive_fraction = 0.3;
  c.vocab_size = 120;
  c.n_true_topics = 3;
  c.association = 0.0;
  c.age_positive = c.age_negative = {40.0, 11.0};
  c.words_positive = c.words_negative = {200.0, 50.0};
  c.seed = 17;
  const SynthDataset ds = generate(c);

  // no class gap in any planted quantity
  CHECK(std::abs(mean_where(ds.planted_topic_weight, ds.labels, 1) -
                 mean_where(ds.planted_topic_weight, ds.labels, 0)) < 0.12);
  // the negative-class topic weight is an untouched Dirichlet draw
  CHECK(std::abs(mean_where(ds.planted_topic_weight, ds.labels, 0) - 1.0 / 3.0) < 0.06);
  std::vector<double> ages(ds.structured.size()), words(ds.word_counts.size());
  for (std::size_t i = 0; i < ds.structured.size(); ++i) {
    ages[i] = ds.structured[i].age_admission;
    words[i] = static_cast<double>(ds.word_counts[i]);
  }
  CHECK(std::abs(mean_where(ages, ds.labels, 1) - mean_where(ages, ds.labels, 0)) < 4.0);
  CHECK(std::abs(mean_where(words, ds.labels, 1) - mean_where(words, ds.labels, 0)) < 20.0);

  // a classifier trained end to end on the null corpus scores at chance
  TempDir tmp("notewatch_synthgen_null");
  write_corpus(ds, tmp.path.string());
  const auto raw = corpus::ingest(tmp.sub("notes.jsonl"), tmp.sub("admissions.jsonl"),
                                  tmp.sub("incidents.jsonl"), tmp.sub("structured.jsonl"));
  const auto assembled = corpus::assemble_periods(raw.notes, raw.admissions, raw.incidents, raw.structured);
  const auto filtered = corpus::filter_short(assembled.records);
  const auto res = textnorm::load_resources(resource("resources/stopwords_nl.txt"));
  std::vector<textnorm::TokenDoc> docs;
  for (const auto& rec : filtered.kept)
    docs.push_back({rec.period_id, textnorm::normalize(rec.period_note, res)});

  harness::PipelineConfig pc;
  pc.representation = harness::Representation::embeddings;
  pc.use_structured = true;
  pc.classifier = harness::ClassifierKind::forest;
  pc.forest_grid = harness::default_forest_grid(25);
  pc.forest_grid.resize(2);
  pc.k_outer = 3;
  pc.k_inner = 2;
  pc.pv.vector_size = 12;
  pc.pv.min_count = 5;
  pc.pv.epochs = 10;
  pc.pv.window = 2;
  pc.min_doc_len = 5;
  pc.seed = 7;
  const auto run = harness::nested_cv(filtered.kept, docs, pc);
  const double prevalence =
      static_cast<double>(std::count_if(filtered.kept.begin(), filtered.kept.end(),
                                        [](const corpus::PeriodRecord& r) { return r.label; })) /
      static_cast<double>(filtered.kept.size());
  CHECK(std::abs(run.summary.pr_auc.mean - prevalence) < 0.12);
  CHECK(std::abs(run.summary.roc_auc.mean - 0.5) < 0.15);
}
