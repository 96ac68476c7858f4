#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "notewatch/corpus.hpp"

namespace notewatch::synthgen {

struct MeanSd {
  double mean = 0.0;
  double sd = 1.0;
};

// Generator knobs. Counts default to one quarter of the target dataset shape
// (2892 patients / 4280 periods); scaled_config rescales both together.
struct SynthConfig {
  long n_patients = 723;
  long n_periods = 1070;
  double positive_fraction = 0.0993;
  long vocab_size = 600;
  int n_true_topics = 6;
  // Planted topic-outcome association in [0, 1]: positive-period topic
  // mixtures are pulled toward the planted topic by this fraction. 0 leaves
  // the two classes textually identical; 1 makes positive notes single-topic.
  double association = 0.5;
  MeanSd age_positive{32.0, 10.0};
  MeanSd age_negative{45.0, 12.0};
  MeanSd words_positive{420.0, 150.0};
  MeanSd words_negative{320.0, 120.0};
  double stopword_rate = 0.30;   // fraction of raw tokens that are stopwords
  double suffix_rate = 0.15;     // fraction of content tokens given a stemmable suffix
  double short_fraction = 0.025; // fraction of periods planted below the word filter
  double doc_alpha = 0.3;        // symmetric Dirichlet concentration for topic mixtures
  std::uint64_t seed = 0;
};

// Config with n_patients/n_periods scaled from the full dataset shape.
SynthConfig scaled_config(double scale);

struct SynthStats {
  long n_patients = 0;  // patients that received at least one period
  long n_periods = 0;
  long n_positive = 0;
  double positive_fraction = 0.0;
  long n_notes = 0;
  long n_incidents = 0;
  long short_periods = 0;  // periods with raw word count <= 100
  long total_words = 0;
  double mean_age_positive = 0.0;
  double mean_age_negative = 0.0;
  double mean_words_positive = 0.0;
  double mean_words_negative = 0.0;
};

// In-memory corpus. admissions, structured, labels, planted_topic_weight and
// word_counts are all aligned: index i describes the same admission period.
// vocabulary holds the planted wordforms; topic k owns the contiguous block
// [k*V/K, (k+1)*V/K) and draws mostly from it.
struct SynthDataset {
  SynthConfig config;  // the exact configuration that produced the dataset
  std::vector<corpus::NoteRecord> notes;
  std::vector<corpus::AdmissionPeriod> admissions;
  std::vector<corpus::IncidentRecord> incidents;
  std::vector<corpus::StructuredRow> structured;
  std::vector<int> labels;
  std::vector<double> planted_topic_weight;
  std::vector<long> word_counts;  // raw whitespace-run counts per period note
  std::vector<std::string> vocabulary;
  SynthStats stats;
};

// Draws a full corpus: per-period documents from a planted topic model, an
// incident inside (start+1d, start+28d] for exactly the planned positive
// periods, class-skewed ages and note lengths, and a small planted fraction
// of short periods. A patient's periods are spaced >= 70 days apart so no
// note or incident can fall into two period windows. Deterministic per seed
// and independent of jobs. Invalid or infeasible configs are fatal.
SynthDataset generate(const SynthConfig& config, int jobs = 1);

// Writes notes.jsonl, admissions.jsonl, incidents.jsonl, structured.jsonl and
// manifest.json (config echo, realized stats, per-file checksums) into dir.
// Output bytes depend only on the dataset contents.
void write_corpus(const SynthDataset& dataset, const std::string& dir);

struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<long> counts;  // values outside the range clamp into the edge bins
};

struct ClassSummary {
  long n = 0;
  double mean_age = 0.0;
  double mean_words = 0.0;
  Histogram ages;   // 16 bins of 5 years from 15
  Histogram words;  // 20 bins of 100 words from 0
};

struct DatasetReport {
  long n_periods = 0;
  long n_patients = 0;
  long n_positive = 0;
  double prevalence = 0.0;
  ClassSummary positive;
  ClassSummary negative;
};

// Descriptive statistics of an assembled dataset; zeroed for empty input.
DatasetReport describe(const std::vector<corpus::PeriodRecord>& records);

}  // namespace notewatch::synthgen
