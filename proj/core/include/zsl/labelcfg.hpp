#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsl/types.hpp"

namespace zsl {

enum class LabelConfigId { L1 = 1, L2, L3, L4, L5, L6, L7 };
enum class LabelKind { original, expert, llm_generated };

inline constexpr LabelConfigId kAllLabelConfigs[] = {LabelConfigId::L1, LabelConfigId::L2, LabelConfigId::L3,
                                                     LabelConfigId::L4, LabelConfigId::L5, LabelConfigId::L6,
                                                     LabelConfigId::L7};

std::string to_string(LabelConfigId id);
/// Accepts "L1".."L7" (case-insensitive); throws ConfigError otherwise.
LabelConfigId parse_label_config(std::string_view s);
LabelKind kind_of(LabelConfigId id);
/// L6 and L7 carry long generated word lists; the rest are short.
bool is_long_config(LabelConfigId id);

/// Words used to build L2-L7 phrases for one configuration.
struct LabelTerms {
  std::map<ClassId, std::string> sentiment_terms;  // defaults to the class token
  std::map<ClassId, std::vector<std::string>> emotion_words;
  std::map<ClassId, std::vector<std::string>> llm_words;
};

/// Label-configuration file contents: a "default" entry plus optional
/// per-config replacements ("L6": {...}).
class LabelVocabulary {
 public:
  /// Emotion words joy/love and anger/sadness; generated word lists for L6/L7.
  static const LabelVocabulary& builtin();
  static LabelVocabulary from_json(const nlohmann::json& j);
  static LabelVocabulary load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Terms for `config`, with the profile's own words layered on top.
  LabelTerms resolve(LabelConfigId config, const DatasetProfile& profile) const;

 private:
  LabelTerms defaults_;
  std::map<LabelConfigId, LabelTerms> per_config_;
};

struct CandidateLabel {
  LabelConfigId config;
  ClassId cls;
  std::string text;
};

/// "A"/"An" for a phrase, by its first letter.
std::string indefinite_article(std::string_view phrase);

CandidateLabel render_label(LabelConfigId config, const DatasetProfile& profile, const ClassId& cls,
                            const LabelVocabulary& vocab = LabelVocabulary::builtin());

/// One label per class, in profile class order.
std::vector<CandidateLabel> render_label_set(LabelConfigId config, const DatasetProfile& profile,
                                             const LabelVocabulary& vocab = LabelVocabulary::builtin());

}  // namespace zsl
