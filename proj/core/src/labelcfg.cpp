#include "zsl/labelcfg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "zsl/error.hpp"

namespace zsl {

using nlohmann::json;

namespace {

const ClassId kNeutral = "neutral";

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// "a", "a or b", "a, b, or c"
std::string join_list(const std::vector<std::string>& items, std::string_view conj) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      if (items.size() > 2) out += ",";
      out += " ";
      if (i + 1 == items.size()) {
        out += conj;
        out += " ";
      }
    }
    out += items[i];
  }
  return out;
}

LabelTerms terms_from_json(const json& j) {
  LabelTerms t;
  if (j.contains("sentiment_terms")) t.sentiment_terms = j["sentiment_terms"].get<std::map<ClassId, std::string>>();
  if (j.contains("emotion_words"))
    t.emotion_words = j["emotion_words"].get<std::map<ClassId, std::vector<std::string>>>();
  if (j.contains("llm_words")) t.llm_words = j["llm_words"].get<std::map<ClassId, std::vector<std::string>>>();
  return t;
}

json terms_to_json(const LabelTerms& t) {
  json j = json::object();
  if (!t.sentiment_terms.empty()) j["sentiment_terms"] = t.sentiment_terms;
  if (!t.emotion_words.empty()) j["emotion_words"] = t.emotion_words;
  if (!t.llm_words.empty()) j["llm_words"] = t.llm_words;
  return j;
}

template <typename Map>
void overlay(Map& base, const Map& top) {
  for (const auto& [k, v] : top) base[k] = v;
}

class Renderer {
 public:
  Renderer(LabelConfigId config, const DatasetProfile& profile, const LabelTerms& terms)
      : config_(config), profile_(profile), terms_(terms) {}

  std::string render(const ClassId& cls) const {
    if (config_ == LabelConfigId::L1) return capitalize(term(cls));

    std::string descriptor;
    if (cls == kNeutral) {
      std::vector<std::string> parts;
      for (const auto& other : profile_.classes)
        if (other != cls) parts.push_back(descriptor_for(other));
      descriptor = parts.size() == 1 ? "not " + parts[0] : "neither " + join_with(parts, " nor ");
    } else {
      descriptor = descriptor_for(cls);
    }

    if (config_ == LabelConfigId::L2) return indefinite_article(descriptor) + " " + descriptor + " " + noun();
    const char* tail = config_ == LabelConfigId::L3 ? " sentiment" : " sentiments";
    return noun_article() + " " + noun() + " with " + descriptor + tail;
  }

 private:
  static std::string join_with(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += sep;
      out += parts[i];
    }
    return out;
  }

  std::string term(const ClassId& cls) const {
    auto it = terms_.sentiment_terms.find(cls);
    return it == terms_.sentiment_terms.end() ? cls : it->second;
  }

  const std::vector<std::string>& words(const std::map<ClassId, std::vector<std::string>>& table,
                                        const ClassId& cls, const char* what) const {
    auto it = table.find(cls);
    if (it == table.end() || it->second.empty())
      throw UnsupportedLabelError("no " + std::string(what) + " for class '" + cls + "' under " +
                                  to_string(config_) + " (profile '" + profile_.name + "')");
    return it->second;
  }

  std::string descriptor_for(const ClassId& cls) const {
    std::vector<std::string> items;
    switch (config_) {
      case LabelConfigId::L2:
      case LabelConfigId::L3:
        return term(cls);
      case LabelConfigId::L4:
        items.push_back(term(cls));
        [[fallthrough]];
      case LabelConfigId::L5: {
        const auto& w = words(terms_.emotion_words, cls, "emotion words");
        items.insert(items.end(), w.begin(), w.end());
        return join_list(items, "or");
      }
      case LabelConfigId::L7:
        items.push_back(term(cls));
        [[fallthrough]];
      case LabelConfigId::L6: {
        const auto& w = words(terms_.llm_words, cls, "generated word list");
        items.insert(items.end(), w.begin(), w.end());
        return join_list(items, "and");
      }
      case LabelConfigId::L1:
        break;
    }
    return term(cls);
  }

  const std::string& noun() const { return profile_.instance_noun; }
  std::string noun_article() const { return profile_.article ? *profile_.article : indefinite_article(noun()); }

  LabelConfigId config_;
  const DatasetProfile& profile_;
  const LabelTerms& terms_;
};

}  // namespace

std::string to_string(LabelConfigId id) { return "L" + std::to_string(static_cast<int>(id)); }

LabelConfigId parse_label_config(std::string_view s) {
  if (s.size() == 2 && (s[0] == 'L' || s[0] == 'l') && s[1] >= '1' && s[1] <= '7')
    return static_cast<LabelConfigId>(s[1] - '0');
  throw ConfigError("unknown label configuration '" + std::string(s) + "'");
}

LabelKind kind_of(LabelConfigId id) {
  switch (id) {
    case LabelConfigId::L1:
      return LabelKind::original;
    case LabelConfigId::L6:
    case LabelConfigId::L7:
      return LabelKind::llm_generated;
    default:
      return LabelKind::expert;
  }
}

bool is_long_config(LabelConfigId id) { return id == LabelConfigId::L6 || id == LabelConfigId::L7; }

std::string indefinite_article(std::string_view phrase) {
  if (!phrase.empty()) {
    switch (std::tolower(static_cast<unsigned char>(phrase.front()))) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return "An";
    }
  }
  return "A";
}

const LabelVocabulary& LabelVocabulary::builtin() {
  static const LabelVocabulary instance = [] {
  LabelVocabulary v;
  v.defaults_.emotion_words = {{"positive", {"joy", "love"}}, {"negative", {"anger", "sadness"}}};
  v.defaults_.llm_words = {
      {"positive",
       {"cheerfulness", "happiness", "amusement", "satisfaction", "bliss", "gaiety", "glee",
        "jolliness", "joviality", "joy", "delight", "enjoyment", "gladness", "jubilation",
        "elation", "ecstasy", "euphoria", "zest", "enthusiasm", "excitement", "thrill", "zeal",
        "exhilaration", "contentment", "pleasure", "optimism"}},
      {"negative",
       {"sadness", "anger", "frustration", "disappointment", "resentment", "bitterness", "misery",
        "sorrow", "grief", "despair", "gloom", "melancholy", "irritation", "annoyance", "hostility",
        "disgust", "hatred", "anxiety", "pessimism", "dissatisfaction"}}};
  return v;
  }();
  return instance;
}

LabelVocabulary LabelVocabulary::from_json(const json& j) {
  LabelVocabulary v;
  try {
    if (j.contains("default")) v.defaults_ = terms_from_json(j["default"]);
    for (const auto& [key, value] : j.items()) {
      if (key == "default") continue;
      v.per_config_[parse_label_config(key)] = terms_from_json(value);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid label configuration file: ") + e.what());
  }
  return v;
}

LabelVocabulary LabelVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open label configuration file " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json LabelVocabulary::to_json() const {
  json j;
  j["default"] = terms_to_json(defaults_);
  for (const auto& [cfg, terms] : per_config_) j[zsl::to_string(cfg)] = terms_to_json(terms);
  return j;
}

LabelTerms LabelVocabulary::resolve(LabelConfigId config, const DatasetProfile& profile) const {
  LabelTerms t = defaults_;
  if (auto it = per_config_.find(config); it != per_config_.end()) {
    overlay(t.sentiment_terms, it->second.sentiment_terms);
    overlay(t.emotion_words, it->second.emotion_words);
    overlay(t.llm_words, it->second.llm_words);
  }
  overlay(t.emotion_words, profile.words.emotion_words);
  overlay(t.llm_words, profile.words.llm_words);
  return t;
}

CandidateLabel render_label(LabelConfigId config, const DatasetProfile& profile, const ClassId& cls,
                            const LabelVocabulary& vocab) {
  if (!profile.has_class(cls))
    throw PreconditionError("class '" + cls + "' not in profile '" + profile.name + "'");
  if (auto cfg = profile.label_overrides.find(to_string(config)); cfg != profile.label_overrides.end()) {
    if (auto it = cfg->second.find(cls); it != cfg->second.end()) return {config, cls, it->second};
  }
  const LabelTerms terms = vocab.resolve(config, profile);
  return {config, cls, Renderer(config, profile, terms).render(cls)};
}

std::vector<CandidateLabel> render_label_set(LabelConfigId config, const DatasetProfile& profile,
                                             const LabelVocabulary& vocab) {
  std::vector<CandidateLabel> out;
  out.reserve(profile.classes.size());
  for (const auto& cls : profile.classes) out.push_back(render_label(config, profile, cls, vocab));
  return out;
}

}  // namespace zsl
