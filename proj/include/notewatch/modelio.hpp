#pragma once

#include <optional>
#include <string>

#include "notewatch/classifiers.hpp"
#include "notewatch/embeddings.hpp"
#include "notewatch/features.hpp"
#include "notewatch/topics.hpp"

namespace notewatch::modelio {

// Model container, format version 1. Layout (all integers little-endian):
//   bytes 0..7    magic "NWMODL01"
//   bytes 8..15   uint64 length of the JSON header in bytes
//   header        UTF-8 JSON: kind ("lda" | "pv" | "forest" | "svm"),
//                 format_version, library_version, the model's scalar and
//                 string fields, and "blobs": [{name, count}] in file order
//   blob data     for each listed blob, count IEEE-754 binary64 values,
//                 little-endian, in header order
// Integer-valued arrays (tree structure) are stored as doubles; every such
// value is far below 2^53 so the encoding is exact.

// Kind string of the model stored at path, without loading the blobs.
std::string sniff_kind(const std::string& path);

void save_topic_model(const std::string& path, const topics::TopicModel& m);
topics::TopicModel load_topic_model(const std::string& path);

void save_pv_model(const std::string& path, const embeddings::ParagraphVectorModel& m);
embeddings::ParagraphVectorModel load_pv_model(const std::string& path);

// A trained classifier plus the feature standardization fitted alongside it
// (svm training standardizes; forest training stores none).
struct ClassifierArtifact {
  classifiers::TrainedClassifier model;
  std::optional<features::StandardizeParams> standardize;
};

void save_classifier(const std::string& path, const ClassifierArtifact& m);
ClassifierArtifact load_classifier(const std::string& path);

}  // namespace notewatch::modelio
