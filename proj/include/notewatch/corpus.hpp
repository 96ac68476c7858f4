#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace notewatch::corpus {

struct NoteRecord {
  std::string note_id;
  std::string patient_id;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  std::string text;
};

struct AdmissionPeriod {
  std::string period_id;
  std::string patient_id;
  std::int64_t start = 0;
  std::optional<std::int64_t> end;
  std::string sub_department;
};

struct IncidentRecord {
  std::string patient_id;
  std::int64_t timestamp = 0;
};

struct StructuredRow {
  std::string period_id;
  double age_admission = 0.0;
  std::string gender;  // categorical, e.g. "M" / "F"
  long n_meds_prescribed = 0;
  long n_meds_administered = 0;
  bool has_diagnosis = false;
};

struct StructuredFeatures {
  double age_admission = 0.0;
  std::string gender;
  long num_words = 0;
  std::int64_t first_note_ts = 0;
  std::int64_t last_note_ts = 0;
  long n_meds_prescribed = 0;
  long n_meds_administered = 0;
  bool has_diagnosis = false;
  int admission_start_hour = 0;  // 0..23
};

struct PeriodRecord {
  std::string period_id;
  std::string patient_id;
  std::string period_note;
  bool label = false;  // violent outcome = positive
  StructuredFeatures structured;
  long note_count = 0;
  long word_count = 0;
};

struct RawCorpus {
  std::vector<NoteRecord> notes;
  std::vector<AdmissionPeriod> admissions;
  std::vector<IncidentRecord> incidents;
  std::vector<StructuredRow> structured;
  long warning_count = 0;  // malformed lines skipped across all four files
};

// Number of maximal non-whitespace runs in the raw text.
long count_words(const std::string& text);

// Reads the four line-delimited JSON input files. Malformed lines are
// skipped and counted; duplicate note or period ids are fatal.
RawCorpus ingest(const std::string& notes_path, const std::string& admissions_path,
                 const std::string& incidents_path, const std::string& structured_path);

struct AssembleResult {
  std::vector<PeriodRecord> records;  // sorted by period_id, unfiltered
  long empty_note_periods = 0;        // periods with zero notes in the window
};

// Builds one PeriodRecord per admission period: the period note concatenates
// the patient's notes with timestamp in [start - 28d, start + 1d] (both ends
// closed), in (timestamp, note_id) order, joined by single spaces. The label
// is true iff the patient has an incident in (start + 1d, start + 28d].
AssembleResult assemble_periods(const std::vector<NoteRecord>& notes,
                                const std::vector<AdmissionPeriod>& admissions,
                                const std::vector<IncidentRecord>& incidents,
                                const std::vector<StructuredRow>& structured);

struct FilterResult {
  std::vector<PeriodRecord> kept;
  long dropped = 0;
};

// Keeps exactly the records with word_count > 100.
FilterResult filter_short(const std::vector<PeriodRecord>& records, long min_words = 100);

// Dataset file (line-delimited PeriodRecords) consumed by the harness.
void write_dataset(const std::string& path, const std::vector<PeriodRecord>& records);
std::vector<PeriodRecord> read_dataset(const std::string& path);

}  // namespace notewatch::corpus
