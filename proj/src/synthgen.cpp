#include "notewatch/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string_view>
#include <unordered_set>

#include <json.hpp>

#include "notewatch/common.hpp"
#include "notewatch/parallel.hpp"
#include "notewatch/rng.hpp"
#include "notewatch/textnorm.hpp"
#include "notewatch/timeutil.hpp"

namespace notewatch::synthgen {

using nlohmann::json;

namespace {

// Frozen copy of the normalizer's stopword resource; generated wordforms must
// never collide with these or they would vanish during normalization. The
// leading entries double as the injection pool.
constexpr std::array<std::string_view, 101> kStopwords = {
    "de",     "en",     "van",    "ik",     "te",      "dat",    "die",    "in",
    "een",    "hij",    "het",    "niet",   "zijn",    "is",     "was",    "op",
    "aan",    "met",    "als",    "voor",   "had",     "er",     "maar",   "om",
    "hem",    "dan",    "zou",    "of",     "wat",     "mijn",   "men",    "dit",
    "zo",     "door",   "over",   "ze",     "zich",    "bij",    "ook",    "tot",
    "je",     "mij",    "uit",    "der",    "daar",    "haar",   "naar",   "heb",
    "hoe",    "heeft",  "hebben", "deze",   "u",       "want",   "nog",    "zal",
    "me",     "zij",    "nu",     "ge",     "geen",    "omdat",  "iets",   "worden",
    "toch",   "al",     "waren",  "veel",   "meer",    "doen",   "toen",   "moet",
    "ben",    "zonder", "kan",    "hun",    "dus",     "alles",  "onder",  "ja",
    "eens",   "hier",   "wie",    "werd",   "altijd",  "doch",   "wordt",  "wezen",
    "kunnen", "ons",    "zelf",   "tegen",  "na",      "reeds",  "wil",    "kon",
    "niets",  "uw",     "iemand", "geweest", "andere"};
static_assert(kStopwords.back() == std::string_view("andere"), "stopword table truncated");
constexpr std::size_t kInjectPool = 30;

// Suffixes the stemmer strips from consonant-final stems, so suffixed
// variants fold back onto the base wordform's stem.
constexpr std::array<std::string_view, 5> kSuffixes = {"en", "e", "s", "ing", "heid"};

constexpr std::array<std::string_view, 26> kOnsets = {
    "",   "b",  "d",  "f",  "g",   "h",  "k",  "l",  "m",  "n",  "p",  "r",  "s",
    "t",  "v",  "w",  "z",  "st",  "sch", "sl", "br", "gr", "kl", "vr", "zw", "tr"};
constexpr std::array<std::string_view, 16> kNuclei = {
    "a", "e", "i", "o", "u", "aa", "ee", "oo", "uu", "oe", "ie", "ij", "ui", "ou", "ei", "eu"};
constexpr std::array<std::string_view, 18> kCodas = {
    "", "k", "l", "m", "n", "p", "r", "s", "t", "f", "g", "ng", "nk", "ks", "st", "cht", "rp", "lk"};

constexpr std::int64_t kMinute = 60;
constexpr std::int64_t kNoteWindowMinutes = 29 * 1440;      // start-28d .. start+1d
constexpr std::int64_t kPeriodSpacingDays = 70;             // keeps period windows disjoint

std::string pad_id(const char* prefix, long value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*ld", prefix, width, value);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return Rng(Rng::mix(seed, Rng::mix(tag, index)));
}

// Marsaglia-Tsang; the shape boost keeps draws exact for shape < 1.
double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.uniform01_open();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0, v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> dirichlet(Rng& rng, double alpha, int k) {
  std::vector<double> theta(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& t : theta) {
    t = gamma_draw(rng, alpha);
    total += t;
  }
  for (auto& t : theta) t /= total;
  return theta;
}

void validate(const SynthConfig& c, int jobs) {
  if (c.n_patients < 1) throw validation_error("n_patients must be at least 1");
  if (c.n_periods < 2) throw validation_error("n_periods must be at least 2");
  if (!(c.positive_fraction > 0.0 && c.positive_fraction < 1.0))
    throw validation_error("positive_fraction must lie strictly between 0 and 1");
  if (!(c.association >= 0.0 && c.association <= 1.0))
    throw validation_error("association must lie in [0, 1]");
  if (c.n_true_topics < 1) throw validation_error("n_true_topics must be at least 1");
  if (c.vocab_size < 10L * c.n_true_topics)
    throw validation_error("vocabulary too small for the topic count (need >= 10 words per topic)");
  for (const auto* d : {&c.age_positive, &c.age_negative})
    if (!(d->sd >= 0.0) || d->mean < 18.0 || d->mean > 90.0)
      throw validation_error("age distributions need mean in [18, 90] and sd >= 0");
  for (const auto* d : {&c.words_positive, &c.words_negative})
    if (!(d->sd >= 0.0) || d->mean < 120.0 || d->mean > 5000.0)
      throw validation_error("note-length distributions need mean in [120, 5000] and sd >= 0");
  if (!(c.stopword_rate >= 0.0 && c.stopword_rate <= 0.9))
    throw validation_error("stopword_rate must lie in [0, 0.9]");
  if (!(c.suffix_rate >= 0.0 && c.suffix_rate <= 1.0))
    throw validation_error("suffix_rate must lie in [0, 1]");
  if (!(c.short_fraction >= 0.0 && c.short_fraction <= 0.5))
    throw validation_error("short_fraction must lie in [0, 0.5]");
  if (!(c.doc_alpha > 0.0)) throw validation_error("doc_alpha must be positive");
  if (jobs < 1) throw validation_error("jobs must be at least 1");
}

// Distinct pronounceable wordforms whose stems are also pairwise distinct and
// disjoint from the stopword list, so normalization maps the planted
// vocabulary onto itself one-to-one.
std::vector<std::string> build_vocabulary(long vocab_size, std::uint64_t seed) {
  std::unordered_set<std::string_view> stopset(kStopwords.begin(), kStopwords.end());
  std::unordered_set<std::string> stems_seen;
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(vocab_size));
  Rng rng = stream(seed, 0x70CAB, 0);
  long attempts = 0;
  const long max_attempts = 500 * vocab_size + 1000;
  while (static_cast<long>(vocab.size()) < vocab_size) {
    if (++attempts > max_attempts)
      throw validation_error("cannot build the requested number of distinct wordforms");
    const int n_syllables = rng.uniform01() < 0.7 ? 2 : 3;
    std::string word;
    for (int s = 0; s < n_syllables; ++s) {
      // interior onsets and the final coda are non-empty to avoid vowel runs
      // and to keep words consonant-final (suffix stripping then folds
      // suffixed variants back onto the base stem)
      const std::size_t onset = s == 0 ? rng.uniform_int(kOnsets.size())
                                       : 1 + rng.uniform_int(kOnsets.size() - 1);
      const std::size_t nucleus = rng.uniform_int(kNuclei.size());
      const std::size_t coda = s == n_syllables - 1 ? 1 + rng.uniform_int(kCodas.size() - 1)
                                                    : rng.uniform_int(kCodas.size());
      word += kOnsets[onset];
      word += kNuclei[nucleus];
      word += kCodas[coda];
    }
    if (word.size() > 12) continue;
    if (stopset.count(word)) continue;
    const std::string st = textnorm::stem(word);
    if (st.empty() || stopset.count(st) || stems_seen.count(st)) continue;
    stems_seen.insert(st);
    vocab.push_back(std::move(word));
  }
  return vocab;
}

// Per-topic cumulative term distributions: topic k spends 95% of its mass on
// its own contiguous vocabulary block (Zipf-weighted) and 5% uniformly.
std::vector<std::vector<double>> topic_cumulatives(long vocab_size, int n_topics) {
  const auto v = static_cast<std::size_t>(vocab_size);
  std::vector<std::vector<double>> cum(static_cast<std::size_t>(n_topics));
  for (int k = 0; k < n_topics; ++k) {
    const std::size_t lo = v * static_cast<std::size_t>(k) / static_cast<std::size_t>(n_topics);
    const std::size_t hi = v * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(n_topics);
    double zipf_total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) zipf_total += 1.0 / static_cast<double>(i - lo + 1);
    auto& c = cum[static_cast<std::size_t>(k)];
    c.resize(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
      double p = 0.05 / static_cast<double>(v);
      if (i >= lo && i < hi) p += 0.95 * (1.0 / static_cast<double>(i - lo + 1)) / zipf_total;
      acc += p;
      c[i] = acc;
    }
    c.back() = 1.0;
  }
  return cum;
}

std::size_t sample_cumulative(const std::vector<double>& cum, double u) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                           static_cast<std::ptrdiff_t>(cum.size()) - 1));
}

struct PeriodPlan {
  long first_index = 0;  // global index of the patient's first period
  long count = 0;
};

}  // namespace

SynthConfig scaled_config(double scale) {
  if (!(scale > 0.0)) throw validation_error("scale must be positive");
  SynthConfig c;
  c.n_patients = std::max(1L, std::lround(2892.0 * scale));
  c.n_periods = std::max(2L, std::lround(4280.0 * scale));
  return c;
}

SynthDataset generate(const SynthConfig& config, int jobs) {
  validate(config, jobs);
  const long n = config.n_periods;
  const auto nu = static_cast<std::size_t>(n);

  SynthDataset ds;
  ds.config = config;
  ds.vocabulary = build_vocabulary(config.vocab_size, config.seed);
  const auto topic_cum = topic_cumulatives(config.vocab_size, config.n_true_topics);

  // Period ownership: every patient gets one period while they last, the
  // remainder spread uniformly; periods are numbered patient-major so each
  // patient owns one contiguous index range.
  std::vector<long> owned(static_cast<std::size_t>(config.n_patients), 0);
  const long base_owners = std::min(config.n_patients, n);
  for (long p = 0; p < base_owners; ++p) owned[static_cast<std::size_t>(p)] = 1;
  {
    Rng alloc = stream(config.seed, 0xA110C, 0);
    for (long extra = 0; extra < n - base_owners; ++extra)
      ++owned[alloc.uniform_int(static_cast<std::uint64_t>(config.n_patients))];
  }
  std::vector<PeriodPlan> plans(owned.size());
  long next_index = 0;
  for (std::size_t p = 0; p < owned.size(); ++p) {
    plans[p] = {next_index, owned[p]};
    next_index += owned[p];
  }

  // Planned labels: exactly round(f * n) positives, placed by one shuffle.
  const long n_pos =
      std::clamp(std::lround(config.positive_fraction * static_cast<double>(n)), 1L, n - 1);
  std::vector<int> labels(nu, 0);
  {
    std::vector<long> order(nu);
    for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng label_rng = stream(config.seed, 0x1ABE1, 0);
    label_rng.shuffle(order);
    for (long i = 0; i < n_pos; ++i) labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  }
  std::vector<char> is_short(nu, 0);
  {
    Rng short_rng = stream(config.seed, 0x5807, 0);
    for (auto& s : is_short) s = short_rng.uniform01() < config.short_fraction ? 1 : 0;
  }

  ds.admissions.resize(nu);
  ds.structured.resize(nu);
  ds.labels = labels;
  ds.planted_topic_weight.assign(nu, 0.0);
  ds.word_counts.assign(nu, 0);
  std::vector<std::vector<corpus::NoteRecord>> note_slots(owned.size());
  std::vector<std::vector<corpus::IncidentRecord>> incident_slots(owned.size());

  const std::int64_t epoch_base = days_from_civil(2015, 1, 1) * kSecondsPerDay;
  const auto k_topics = static_cast<std::size_t>(config.n_true_topics);

  parallel_for(owned.size(), static_cast<unsigned>(jobs), [&](std::size_t p) {
    const PeriodPlan plan = plans[p];
    if (plan.count == 0) return;
    Rng rng = stream(config.seed, 0xBA5E, p);
    const std::string patient_id = pad_id("pt", static_cast<long>(p) + 1, 5);
    const std::string gender = rng.uniform01() < 0.5 ? "M" : "F";

    std::int64_t start = epoch_base + static_cast<std::int64_t>(rng.uniform_int(3 * 365 * 1440)) * kMinute;
    for (long i = 0; i < plan.count; ++i) {
      const long g = plan.first_index + i;
      const auto gu = static_cast<std::size_t>(g);
      if (i > 0)
        start += kPeriodSpacingDays * kSecondsPerDay +
                 static_cast<std::int64_t>(rng.uniform_int(20 * 1440 + 1)) * kMinute;
      const bool positive = labels[gu] == 1;
      const bool short_period = is_short[gu] != 0;

      const MeanSd& age_dist = positive ? config.age_positive : config.age_negative;
      const double age = std::clamp(rng.normal(age_dist.mean, age_dist.sd), 18.0, 90.0);

      long words = 0;
      if (short_period) {
        words = 20 + static_cast<long>(rng.uniform_int(81));
      } else {
        const MeanSd& wd = positive ? config.words_positive : config.words_negative;
        words = std::clamp(std::lround(rng.normal(wd.mean, wd.sd)), 120L, 5000L);
      }
      const long n_notes = short_period ? 1 + static_cast<long>(rng.uniform_int(2))
                                        : 2 + static_cast<long>(rng.uniform_int(5));

      std::vector<double> theta = dirichlet(rng, config.doc_alpha, config.n_true_topics);
      if (positive) {
        for (auto& t : theta) t *= 1.0 - config.association;
        theta[0] += config.association;
      }
      ds.planted_topic_weight[gu] = theta[0];
      ds.word_counts[gu] = words;

      auto& adm = ds.admissions[gu];
      adm.period_id = pad_id("p", g + 1, 6);
      adm.patient_id = patient_id;
      adm.start = start;
      adm.sub_department = "dept" + std::to_string(1 + rng.uniform_int(6));
      if (rng.uniform01() < 0.8)
        adm.end = start + (3 + static_cast<std::int64_t>(rng.uniform_int(58))) * kSecondsPerDay;
      else
        adm.end.reset();

      auto& row = ds.structured[gu];
      row.period_id = adm.period_id;
      row.age_admission = age;
      row.gender = gender;
      row.n_meds_prescribed = static_cast<long>(rng.uniform_int(9));
      row.n_meds_administered = static_cast<long>(rng.uniform_int(16));
      row.has_diagnosis = rng.uniform01() < 0.7;

      std::vector<std::int64_t> note_ts(static_cast<std::size_t>(n_notes));
      for (auto& ts : note_ts)
        ts = start - 28 * kSecondsPerDay +
             static_cast<std::int64_t>(rng.uniform_int(kNoteWindowMinutes + 1)) * kMinute;
      std::sort(note_ts.begin(), note_ts.end());

      auto draw_token = [&]() -> std::string {
        if (rng.uniform01() < config.stopword_rate)
          return std::string(kStopwords[rng.uniform_int(kInjectPool)]);
        double u = rng.uniform01();
        std::size_t z = 0;
        double acc = 0.0;
        for (std::size_t t = 0; t < k_topics; ++t) {
          acc += theta[t];
          if (u < acc || t == k_topics - 1) {
            z = t;
            break;
          }
        }
        std::string form = ds.vocabulary[sample_cumulative(topic_cum[z], rng.uniform01())];
        if (rng.uniform01() < config.suffix_rate) form += kSuffixes[rng.uniform_int(kSuffixes.size())];
        return form;
      };

      for (long j = 0; j < n_notes; ++j) {
        long note_words = words / n_notes + (j < words % n_notes ? 1 : 0);
        std::string text;
        while (note_words > 0) {
          const long slen = std::min(note_words, 6 + static_cast<long>(rng.uniform_int(9)));
          for (long t = 0; t < slen; ++t) {
            std::string tok = draw_token();
            if (t == 0 && tok[0] >= 'a' && tok[0] <= 'z') tok[0] = static_cast<char>(tok[0] - 'a' + 'A');
            if (t == slen - 1)
              tok += '.';
            else if (rng.uniform01() < 0.06)
              tok += ',';
            if (!text.empty()) text += ' ';
            text += tok;
          }
          note_words -= slen;
        }
        corpus::NoteRecord note;
        note.note_id = pad_id("n", g + 1, 6) + pad_id("", j + 1, 2);
        note.patient_id = patient_id;
        note.timestamp = note_ts[static_cast<std::size_t>(j)];
        note.text = std::move(text);
        note_slots[p].push_back(std::move(note));
      }

      if (positive) {
        const std::int64_t minutes = 1441 + static_cast<std::int64_t>(rng.uniform_int(38880));
        incident_slots[p].push_back({patient_id, start + minutes * kMinute});
      } else {
        // decoy incidents exercise the labeling boundaries without ever
        // landing inside any period's outcome window
        const double u = rng.uniform01();
        if (u < 0.06) {
          const std::int64_t minutes = 60 + static_cast<std::int64_t>(rng.uniform_int(1321));
          incident_slots[p].push_back({patient_id, start + minutes * kMinute});
        } else if (u < 0.10) {
          const std::int64_t days = 1 + static_cast<std::int64_t>(rng.uniform_int(20));
          incident_slots[p].push_back({patient_id, start - days * kSecondsPerDay});
        }
      }
    }
  });

  for (std::size_t p = 0; p < owned.size(); ++p) {
    for (auto& note : note_slots[p]) ds.notes.push_back(std::move(note));
    for (auto& inc : incident_slots[p]) ds.incidents.push_back(std::move(inc));
  }

  auto& st = ds.stats;
  st.n_periods = n;
  st.n_positive = n_pos;
  st.positive_fraction = static_cast<double>(n_pos) / static_cast<double>(n);
  st.n_notes = static_cast<long>(ds.notes.size());
  st.n_incidents = static_cast<long>(ds.incidents.size());
  for (long c : owned) st.n_patients += c > 0 ? 1 : 0;
  double age_sum[2] = {0.0, 0.0}, word_sum[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < nu; ++i) {
    const int y = ds.labels[i];
    age_sum[y] += ds.structured[i].age_admission;
    word_sum[y] += static_cast<double>(ds.word_counts[i]);
    st.total_words += ds.word_counts[i];
    if (ds.word_counts[i] <= 100) ++st.short_periods;
  }
  st.mean_age_positive = age_sum[1] / static_cast<double>(n_pos);
  st.mean_age_negative = age_sum[0] / static_cast<double>(n - n_pos);
  st.mean_words_positive = word_sum[1] / static_cast<double>(n_pos);
  st.mean_words_negative = word_sum[0] / static_cast<double>(n - n_pos);
  return ds;
}

namespace {

std::string notes_jsonl(const SynthDataset& ds) {
  std::string out;
  for (const auto& note : ds.notes) {
    json j;
    j["note_id"] = note.note_id;
    j["patient_id"] = note.patient_id;
    j["timestamp"] = format_iso8601(note.timestamp);
    j["text"] = note.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string admissions_jsonl(const SynthDataset& ds) {
  std::string out;
  for (const auto& adm : ds.admissions) {
    json j;
    j["period_id"] = adm.period_id;
    j["patient_id"] = adm.patient_id;
    j["start"] = format_iso8601(adm.start);
    if (adm.end) j["end"] = format_iso8601(*adm.end);
    j["sub_department"] = adm.sub_department;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string incidents_jsonl(const SynthDataset& ds) {
  std::string out;
  for (const auto& inc : ds.incidents) {
    json j;
    j["patient_id"] = inc.patient_id;
    j["timestamp"] = format_iso8601(inc.timestamp);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string structured_jsonl(const SynthDataset& ds) {
  std::string out;
  for (const auto& row : ds.structured) {
    json j;
    j["period_id"] = row.period_id;
    j["age_admission"] = row.age_admission;
    j["gender"] = row.gender;
    j["n_meds_prescribed"] = row.n_meds_prescribed;
    j["n_meds_administered"] = row.n_meds_administered;
    j["has_diagnosis"] = row.has_diagnosis;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw runtime_failure("cannot write output file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw runtime_failure("failed while writing: " + path.string());
}

}  // namespace

void write_corpus(const SynthDataset& dataset, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);

  const std::array<std::pair<const char*, std::string>, 4> files = {{
      {"notes.jsonl", notes_jsonl(dataset)},
      {"admissions.jsonl", admissions_jsonl(dataset)},
      {"incidents.jsonl", incidents_jsonl(dataset)},
      {"structured.jsonl", structured_jsonl(dataset)},
  }};

  json manifest;
  manifest["version"] = kVersion;
  const SynthConfig& c = dataset.config;
  manifest["config"] = {{"n_patients", c.n_patients},
                        {"n_periods", c.n_periods},
                        {"positive_fraction", c.positive_fraction},
                        {"vocab_size", c.vocab_size},
                        {"n_true_topics", c.n_true_topics},
                        {"association", c.association},
                        {"age_positive", {{"mean", c.age_positive.mean}, {"sd", c.age_positive.sd}}},
                        {"age_negative", {{"mean", c.age_negative.mean}, {"sd", c.age_negative.sd}}},
                        {"words_positive", {{"mean", c.words_positive.mean}, {"sd", c.words_positive.sd}}},
                        {"words_negative", {{"mean", c.words_negative.mean}, {"sd", c.words_negative.sd}}},
                        {"stopword_rate", c.stopword_rate},
                        {"suffix_rate", c.suffix_rate},
                        {"short_fraction", c.short_fraction},
                        {"doc_alpha", c.doc_alpha},
                        {"seed", c.seed}};
  const SynthStats& st = dataset.stats;
  manifest["stats"] = {{"n_patients", st.n_patients},
                       {"n_periods", st.n_periods},
                       {"n_positive", st.n_positive},
                       {"positive_fraction", st.positive_fraction},
                       {"n_notes", st.n_notes},
                       {"n_incidents", st.n_incidents},
                       {"short_periods", st.short_periods},
                       {"total_words", st.total_words},
                       {"mean_age_positive", st.mean_age_positive},
                       {"mean_age_negative", st.mean_age_negative},
                       {"mean_words_positive", st.mean_words_positive},
                       {"mean_words_negative", st.mean_words_negative}};
  for (const auto& [name, content] : files) {
    const long lines = static_cast<long>(std::count(content.begin(), content.end(), '\n'));
    manifest["files"][name] = {{"lines", lines}, {"fnv1a64", hex64(fnv1a64(content))}};
    write_file(root / name, content);
  }
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

DatasetReport describe(const std::vector<corpus::PeriodRecord>& records) {
  DatasetReport report;
  auto init = [](ClassSummary& s) {
    s.ages = {15.0, 5.0, std::vector<long>(16, 0)};
    s.words = {0.0, 100.0, std::vector<long>(20, 0)};
  };
  init(report.positive);
  init(report.negative);
  if (records.empty()) return report;

  auto bin = [](const Histogram& h, double v) {
    const auto raw = static_cast<long>(std::floor((v - h.lo) / h.width));
    return static_cast<std::size_t>(std::clamp<long>(raw, 0, static_cast<long>(h.counts.size()) - 1));
  };
  std::unordered_set<std::string> patients;
  for (const auto& r : records) {
    patients.insert(r.patient_id);
    ClassSummary& s = r.label ? report.positive : report.negative;
    ++s.n;
    s.mean_age += r.structured.age_admission;
    s.mean_words += static_cast<double>(r.word_count);
    ++s.ages.counts[bin(s.ages, r.structured.age_admission)];
    ++s.words.counts[bin(s.words, static_cast<double>(r.word_count))];
  }
  for (ClassSummary* s : {&report.positive, &report.negative}) {
    if (s->n > 0) {
      s->mean_age /= static_cast<double>(s->n);
      s->mean_words /= static_cast<double>(s->n);
    }
  }
  report.n_periods = static_cast<long>(records.size());
  report.n_patients = static_cast<long>(patients.size());
  report.n_positive = report.positive.n;
  report.prevalence = static_cast<double>(report.n_positive) / static_cast<double>(records.size());
  return report;
}

}  // namespace notewatch::synthgen
