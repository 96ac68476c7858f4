#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "notewatch/harness.hpp"
#include "notewatch/synthgen.hpp"

namespace notewatch::runconfig {

// Flat key = value file: one pair per line, '#' starts a comment, blank
// lines are skipped, whitespace around key and value is trimmed. Duplicate
// or unknown keys are fatal, as is a line without '='.
using KvMap = std::map<std::string, std::string>;

KvMap parse_config_text(const std::string& text);
KvMap parse_config_file(const std::string& path);

// The full documented key set; the parsers reject anything else.
const std::vector<std::string>& known_keys();

// Typed accessors: the fallback applies when the key is absent; a present
// key that fails to parse exactly is fatal.
std::string get_string(const KvMap& kv, const std::string& key, const std::string& fallback);
long get_long(const KvMap& kv, const std::string& key, long fallback);
double get_double(const KvMap& kv, const std::string& key, double fallback);
bool get_bool(const KvMap& kv, const std::string& key, bool fallback);
std::uint64_t get_u64(const KvMap& kv, const std::string& key, std::uint64_t fallback);

// Pipeline settings from the pipeline. / forest. / svm. / lda. / pv. keys.
// The run seed also seeds the topic and embedding trainers unless lda.seed
// or pv.seed overrides it. forest.grid_limit / svm.grid_limit keep only the
// first n cells of the default hyperparameter grid (0 keeps all).
harness::PipelineConfig pipeline_from(const KvMap& kv, std::uint64_t seed);

// Run B of a comparison: pipeline_from with the compare.representation,
// compare.classifier and compare.use_structured overrides applied.
harness::PipelineConfig compare_pipeline_from(const KvMap& kv, std::uint64_t seed);
bool has_compare_keys(const KvMap& kv);

// Synthesis settings: scaled_config(synth.scale) with synth.* overrides.
synthgen::SynthConfig synth_from(const KvMap& kv, std::uint64_t seed);

}  // namespace notewatch::runconfig
