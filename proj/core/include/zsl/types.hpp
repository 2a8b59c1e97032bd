#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zsl {

/// Canonical class token: lowercase, e.g. "positive", "non-negative".
using ClassId = std::string;

struct Instance {
  std::string id;
  std::string text;
  ClassId gold;
};

/// Descriptor words a profile may add or replace for label rendering.
struct LabelWords {
  std::map<ClassId, std::vector<std::string>> emotion_words;
  std::map<ClassId, std::vector<std::string>> llm_words;
};

struct DatasetProfile {
  std::string name;
  // Declared order doubles as the tie-break order for every classifier.
  std::vector<ClassId> classes;
  std::string instance_noun;
  // Replaces the a/an heuristic for phrases that start with the noun.
  std::optional<std::string> article;
  std::map<std::string, ClassId> emotion_map;
  LabelWords words;
  // label config id ("L4") -> class -> full label text
  std::map<std::string, std::map<ClassId, std::string>> label_overrides;

  bool has_class(const ClassId& c) const;
  /// Position of `c` in `classes`; throws PreconditionError when absent.
  std::size_t class_index(const ClassId& c) const;
};

struct Dataset {
  DatasetProfile profile;
  std::vector<Instance> instances;
  std::map<ClassId, std::size_t> counts;
  // Emotion-annotated rows whose emotion has no polarity mapping.
  std::size_t dropped = 0;

  std::size_t size() const { return instances.size(); }
};

}  // namespace zsl
