#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zsl/backend.hpp"
#include "zsl/labelcfg.hpp"
#include "zsl/types.hpp"

namespace zsl {

enum class Strategy { embedding, nli, binary, generative, external };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view s);
/// Model kind a strategy needs from its backend.
ModelKind model_kind_for(Strategy s);

// Values for PredictionRecord::flags.
namespace flag {
inline constexpr const char* kFailed = "failed";
inline constexpr const char* kZeroVector = "zero_vector";
inline constexpr const char* kLowConfidence = "low_confidence";
inline constexpr const char* kTruncatedInput = "truncated_input";
inline constexpr const char* kTruncatedOutput = "truncated_output";
inline constexpr const char* kPromptEscaped = "prompt_escaped";
}  // namespace flag

struct PredictionRecord {
  std::string instance_id;
  std::string dataset;
  Strategy strategy = Strategy::embedding;
  std::string model;
  std::string label_config;
  std::map<ClassId, double> scores;
  // nullopt = Unmapped.
  std::optional<ClassId> predicted;
  std::optional<std::string> raw_output;
  // Per-label NLI triples; only the entailment component enters the decision.
  std::map<ClassId, NliScores> nli_scores;
  std::vector<std::string> flags;
  std::optional<std::string> error;

  bool has_flag(std::string_view f) const;
  bool failed() const { return has_flag(flag::kFailed); }
};

using ScoredClass = std::pair<ClassId, double>;

/// Index of the highest score; equal scores resolve to the earliest entry.
std::size_t argmax_first(std::span<const ScoredClass> scores);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Cosine argmax over label vectors given in profile class order. A zero
/// instance vector yields Unmapped with the zero_vector flag.
PredictionRecord embed_classify(const EmbeddingVector& instance,
                                std::span<const std::pair<ClassId, EmbeddingVector>> labels);

/// One NLI call per label (instance = premise, label = hypothesis); the
/// decision uses entailment only. A backend failure marks the record failed.
PredictionRecord nli_classify(const std::string& instance_text, std::span<const CandidateLabel> labels,
                              Backend& backend, const std::string& model);

PredictionRecord binary_relevance_classify(const std::string& instance_text, std::span<const CandidateLabel> labels,
                                           Backend& backend, const std::string& model);

struct Prompt {
  std::string text;
  // Instance text contained a backtick fence that had to be broken up.
  bool escaped = false;
};

Prompt build_prompt(const DatasetProfile& profile, std::span<const CandidateLabel> labels,
                    const std::string& instance_text);

/// Maps a free-text reply to a class. Full rendered labels are tried first;
/// L6/L7 then fall back to word overlap with each label; finally class
/// sentiment names are searched.
std::optional<ClassId> postprocess_output(const std::string& raw, LabelConfigId config,
                                          std::span<const CandidateLabel> labels);

PredictionRecord gen_classify(const std::string& instance_text, const DatasetProfile& profile,
                              std::span<const CandidateLabel> labels, Backend& backend, const std::string& model);

/// Lowercases, turns punctuation into spaces (keeping intra-word hyphens) and
/// collapses whitespace.
std::string normalize_reply(std::string_view raw);

}  // namespace zsl
