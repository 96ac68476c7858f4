#include "notewatch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "notewatch/common.hpp"
#include "notewatch/timeutil.hpp"

namespace notewatch::corpus {

using nlohmann::json;

namespace {

constexpr std::int64_t kMinTimestamp = 7305LL * kSecondsPerDay;    // 1990-01-01
constexpr std::int64_t kMaxTimestamp = 47482LL * kSecondsPerDay;   // 2100-01-01

bool timestamp_in_range(std::int64_t t) { return t >= kMinTimestamp && t < kMaxTimestamp; }

bool whitespace_only(const std::string& s) {
  for (unsigned char c : s)
    if (!std::isspace(c)) return false;
  return true;
}

// Parses one JSONL line into `out`; returns false (malformed) on any schema
// or invariant violation.
bool parse_note(const json& j, NoteRecord& out) {
  if (!j.contains("note_id") || !j.contains("patient_id") || !j.contains("timestamp") ||
      !j.contains("text"))
    return false;
  if (!j["note_id"].is_string() || !j["patient_id"].is_string() || !j["timestamp"].is_string() ||
      !j["text"].is_string())
    return false;
  out.note_id = j["note_id"].get<std::string>();
  out.patient_id = j["patient_id"].get<std::string>();
  out.text = j["text"].get<std::string>();
  if (out.note_id.empty() || out.patient_id.empty()) return false;
  if (out.text.empty() || whitespace_only(out.text)) return false;
  const auto ts = parse_iso8601(j["timestamp"].get<std::string>());
  if (!ts || !timestamp_in_range(*ts)) return false;
  out.timestamp = *ts;
  return true;
}

bool parse_admission(const json& j, AdmissionPeriod& out) {
  if (!j.contains("period_id") || !j.contains("patient_id") || !j.contains("start") ||
      !j.contains("sub_department"))
    return false;
  if (!j["period_id"].is_string() || !j["patient_id"].is_string() || !j["start"].is_string() ||
      !j["sub_department"].is_string())
    return false;
  out.period_id = j["period_id"].get<std::string>();
  out.patient_id = j["patient_id"].get<std::string>();
  out.sub_department = j["sub_department"].get<std::string>();
  if (out.period_id.empty() || out.patient_id.empty()) return false;
  const auto start = parse_iso8601(j["start"].get<std::string>());
  if (!start || !timestamp_in_range(*start)) return false;
  out.start = *start;
  out.end.reset();
  if (j.contains("end") && !j["end"].is_null()) {
    if (!j["end"].is_string()) return false;
    const auto end = parse_iso8601(j["end"].get<std::string>());
    if (!end || *end < out.start) return false;
    out.end = *end;
  }
  return true;
}

bool parse_incident(const json& j, IncidentRecord& out) {
  if (!j.contains("patient_id") || !j.contains("timestamp")) return false;
  if (!j["patient_id"].is_string() || !j["timestamp"].is_string()) return false;
  out.patient_id = j["patient_id"].get<std::string>();
  if (out.patient_id.empty()) return false;
  const auto ts = parse_iso8601(j["timestamp"].get<std::string>());
  if (!ts || !timestamp_in_range(*ts)) return false;
  out.timestamp = *ts;
  return true;
}

bool parse_structured(const json& j, StructuredRow& out) {
  if (!j.contains("period_id") || !j.contains("age_admission") || !j.contains("gender") ||
      !j.contains("n_meds_prescribed") || !j.contains("n_meds_administered") ||
      !j.contains("has_diagnosis"))
    return false;
  if (!j["period_id"].is_string() || !j["age_admission"].is_number() ||
      !j["gender"].is_string() || !j["n_meds_prescribed"].is_number_integer() ||
      !j["n_meds_administered"].is_number_integer() || !j["has_diagnosis"].is_boolean())
    return false;
  out.period_id = j["period_id"].get<std::string>();
  if (out.period_id.empty()) return false;
  out.age_admission = j["age_admission"].get<double>();
  if (out.age_admission < 0.0 || out.age_admission > 120.0) return false;
  out.gender = j["gender"].get<std::string>();
  out.n_meds_prescribed = j["n_meds_prescribed"].get<long>();
  out.n_meds_administered = j["n_meds_administered"].get<long>();
  if (out.n_meds_prescribed < 0 || out.n_meds_administered < 0) return false;
  out.has_diagnosis = j["has_diagnosis"].get<bool>();
  return true;
}

// Applies `parse` to every line of a JSONL file; counts malformed lines.
template <typename Record, typename ParseFn>
std::vector<Record> read_jsonl(const std::string& path, ParseFn parse, long& warnings) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open input file: " + path);
  std::vector<Record> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || whitespace_only(line)) continue;
    json j = json::parse(line, nullptr, false);
    Record rec;
    if (j.is_discarded() || !j.is_object() || !parse(j, rec)) {
      ++warnings;
      std::cerr << "warning: " << path << ":" << line_no << ": malformed record skipped\n";
      continue;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

long count_words(const std::string& text) {
  long count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool ws = std::isspace(c) != 0;
    if (!ws && !in_word) ++count;
    in_word = !ws;
  }
  return count;
}

RawCorpus ingest(const std::string& notes_path, const std::string& admissions_path,
                 const std::string& incidents_path, const std::string& structured_path) {
  RawCorpus c;
  c.notes = read_jsonl<NoteRecord>(notes_path, parse_note, c.warning_count);
  c.admissions = read_jsonl<AdmissionPeriod>(admissions_path, parse_admission, c.warning_count);
  c.incidents = read_jsonl<IncidentRecord>(incidents_path, parse_incident, c.warning_count);
  c.structured = read_jsonl<StructuredRow>(structured_path, parse_structured, c.warning_count);

  std::unordered_set<std::string> seen;
  seen.reserve(c.notes.size());
  for (const auto& n : c.notes)
    if (!seen.insert(n.note_id).second)
      throw validation_error("duplicate note_id: " + n.note_id);
  seen.clear();
  for (const auto& a : c.admissions)
    if (!seen.insert(a.period_id).second)
      throw validation_error("duplicate period_id: " + a.period_id);
  seen.clear();
  for (const auto& s : c.structured)
    if (!seen.insert(s.period_id).second)
      throw validation_error("duplicate structured row for period_id: " + s.period_id);
  return c;
}

AssembleResult assemble_periods(const std::vector<NoteRecord>& notes,
                                const std::vector<AdmissionPeriod>& admissions,
                                const std::vector<IncidentRecord>& incidents,
                                const std::vector<StructuredRow>& structured) {
  // Per-patient note index, sorted by (timestamp, note_id).
  std::unordered_map<std::string, std::vector<const NoteRecord*>> notes_by_patient;
  for (const auto& n : notes) notes_by_patient[n.patient_id].push_back(&n);
  for (auto& [_, v] : notes_by_patient)
    std::sort(v.begin(), v.end(), [](const NoteRecord* a, const NoteRecord* b) {
      if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
      return a->note_id < b->note_id;
    });

  std::unordered_map<std::string, std::vector<std::int64_t>> incidents_by_patient;
  for (const auto& i : incidents) incidents_by_patient[i.patient_id].push_back(i.timestamp);

  std::unordered_map<std::string, const StructuredRow*> structured_by_period;
  for (const auto& s : structured) structured_by_period[s.period_id] = &s;

  AssembleResult result;
  result.records.reserve(admissions.size());
  for (const auto& adm : admissions) {
    const auto srow = structured_by_period.find(adm.period_id);
    if (srow == structured_by_period.end())
      throw validation_error("no structured row for period_id: " + adm.period_id);

    const std::int64_t note_lo = adm.start - 28 * kSecondsPerDay;  // closed
    const std::int64_t note_hi = adm.start + 1 * kSecondsPerDay;   // closed
    const std::int64_t inc_lo = adm.start + 1 * kSecondsPerDay;    // open
    const std::int64_t inc_hi = adm.start + 28 * kSecondsPerDay;   // closed

    PeriodRecord rec;
    rec.period_id = adm.period_id;
    rec.patient_id = adm.patient_id;

    std::string note;
    long n_notes = 0;
    std::int64_t first_ts = 0, last_ts = 0;
    if (auto it = notes_by_patient.find(adm.patient_id); it != notes_by_patient.end()) {
      for (const NoteRecord* n : it->second) {
        if (n->timestamp < note_lo || n->timestamp > note_hi) continue;
        if (n_notes == 0)
          first_ts = n->timestamp;
        else
          note += ' ';
        last_ts = n->timestamp;
        note += n->text;
        ++n_notes;
      }
    }
    if (n_notes == 0) ++result.empty_note_periods;

    rec.period_note = std::move(note);
    rec.note_count = n_notes;
    rec.word_count = count_words(rec.period_note);

    rec.label = false;
    if (auto it = incidents_by_patient.find(adm.patient_id); it != incidents_by_patient.end()) {
      for (std::int64_t t : it->second) {
        if (t > inc_lo && t <= inc_hi) {
          rec.label = true;
          break;
        }
      }
    }

    StructuredFeatures& f = rec.structured;
    f.age_admission = srow->second->age_admission;
    f.gender = srow->second->gender;
    f.num_words = rec.word_count;
    f.first_note_ts = first_ts;
    f.last_note_ts = last_ts;
    f.n_meds_prescribed = srow->second->n_meds_prescribed;
    f.n_meds_administered = srow->second->n_meds_administered;
    f.has_diagnosis = srow->second->has_diagnosis;
    std::int64_t sod = adm.start % kSecondsPerDay;
    if (sod < 0) sod += kSecondsPerDay;
    f.admission_start_hour = static_cast<int>(sod / 3600);

    result.records.push_back(std::move(rec));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const PeriodRecord& a, const PeriodRecord& b) { return a.period_id < b.period_id; });
  return result;
}

FilterResult filter_short(const std::vector<PeriodRecord>& records, long min_words) {
  FilterResult r;
  for (const auto& rec : records) {
    if (rec.word_count > min_words)
      r.kept.push_back(rec);
    else
      ++r.dropped;
  }
  return r;
}

namespace {

json period_to_json(const PeriodRecord& r) {
  return json{{"period_id", r.period_id},
              {"patient_id", r.patient_id},
              {"period_note", r.period_note},
              {"label", r.label},
              {"note_count", r.note_count},
              {"word_count", r.word_count},
              {"structured",
               json{{"age_admission", r.structured.age_admission},
                    {"gender", r.structured.gender},
                    {"num_words", r.structured.num_words},
                    {"first_note_ts", format_iso8601(r.structured.first_note_ts, true)},
                    {"last_note_ts", format_iso8601(r.structured.last_note_ts, true)},
                    {"n_meds_prescribed", r.structured.n_meds_prescribed},
                    {"n_meds_administered", r.structured.n_meds_administered},
                    {"has_diagnosis", r.structured.has_diagnosis},
                    {"admission_start_hour", r.structured.admission_start_hour}}}};
}

}  // namespace

void write_dataset(const std::string& path, const std::vector<PeriodRecord>& records) {
  std::ofstream out(path);
  if (!out) throw runtime_failure("cannot write dataset file: " + path);
  for (const auto& r : records) out << period_to_json(r).dump() << '\n';
}

std::vector<PeriodRecord> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open dataset file: " + path);
  std::vector<PeriodRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw validation_error("malformed dataset line in " + path);
    PeriodRecord r;
    r.period_id = j.at("period_id").get<std::string>();
    r.patient_id = j.at("patient_id").get<std::string>();
    r.period_note = j.at("period_note").get<std::string>();
    r.label = j.at("label").get<bool>();
    r.note_count = j.at("note_count").get<long>();
    r.word_count = j.at("word_count").get<long>();
    const json& s = j.at("structured");
    r.structured.age_admission = s.at("age_admission").get<double>();
    r.structured.gender = s.at("gender").get<std::string>();
    r.structured.num_words = s.at("num_words").get<long>();
    r.structured.first_note_ts = parse_iso8601(s.at("first_note_ts").get<std::string>()).value_or(0);
    r.structured.last_note_ts = parse_iso8601(s.at("last_note_ts").get<std::string>()).value_or(0);
    r.structured.n_meds_prescribed = s.at("n_meds_prescribed").get<long>();
    r.structured.n_meds_administered = s.at("n_meds_administered").get<long>();
    r.structured.has_diagnosis = s.at("has_diagnosis").get<bool>();
    r.structured.admission_start_hour = s.at("admission_start_hour").get<int>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace notewatch::corpus
