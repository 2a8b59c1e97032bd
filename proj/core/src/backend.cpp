#include "zsl/backend.hpp"

#include <filesystem>

#include "zsl/error.hpp"
#include "zsl/fixture_backend.hpp"
#include "zsl/http_backend.hpp"

namespace zsl {

using nlohmann::json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::embedding:
      return "embedding";
    case ModelKind::nli:
      return "nli";
    case ModelKind::binary:
      return "binary";
    case ModelKind::generative:
      return "generative";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "embedding") return ModelKind::embedding;
  if (s == "nli") return ModelKind::nli;
  if (s == "binary") return ModelKind::binary;
  if (s == "generative") return ModelKind::generative;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

std::string to_string(FinishReason r) {
  switch (r) {
    case FinishReason::complete:
      return "complete";
    case FinishReason::truncated:
      return "truncated";
    case FinishReason::other:
      return "other";
  }
  return "other";
}

FinishReason parse_finish_reason(std::string_view s) {
  if (s == "complete") return FinishReason::complete;
  if (s == "truncated") return FinishReason::truncated;
  return FinishReason::other;
}

void to_json(json& j, const EmbeddingVector& v) {
  j = json{{"values", v.values}, {"model", v.model_id}, {"truncated", v.truncated}};
}
void from_json(const json& j, EmbeddingVector& v) {
  v.values = j.at("values").get<std::vector<double>>();
  v.model_id = j.at("model").get<std::string>();
  v.truncated = j.value("truncated", false);
}
void to_json(json& j, const NliScores& s) {
  j = json{{"entailment", s.entailment}, {"neutral", s.neutral}, {"contradiction", s.contradiction}};
}
void from_json(const json& j, NliScores& s) {
  s.entailment = j.at("entailment").get<double>();
  s.neutral = j.at("neutral").get<double>();
  s.contradiction = j.at("contradiction").get<double>();
}
void to_json(json& j, const BinaryRelevance& b) { j = json{{"true_confidence", b.true_confidence}}; }
void from_json(const json& j, BinaryRelevance& b) { b.true_confidence = j.at("true_confidence").get<double>(); }
void to_json(json& j, const GenerationResult& g) {
  j = json{{"text", g.text}, {"model", g.model_id}, {"finish_reason", to_string(g.finish_reason)}};
}
void from_json(const json& j, GenerationResult& g) {
  g.text = j.at("text").get<std::string>();
  g.model_id = j.at("model").get<std::string>();
  g.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
}

ModelRegistry::ModelRegistry(std::vector<ModelSpec> models) {
  for (auto& m : models) {
    if (m.id.empty()) throw ConfigError("model with empty id");
    auto id = m.id;
    if (!models_.emplace(id, std::move(m)).second) throw ConfigError("duplicate model id '" + id + "'");
  }
}

ModelRegistry ModelRegistry::from_json(const json& models) {
  std::vector<ModelSpec> specs;
  try {
    for (const auto& m : models) {
      ModelSpec spec;
      spec.id = m.at("id").get<std::string>();
      spec.kind = parse_model_kind(m.at("kind").get<std::string>());
      spec.dimension = m.value("dimension", std::size_t{0});
      spec.max_input_chars = m.value("max_input_chars", std::size_t{0});
      specs.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model list: ") + e.what());
  }
  return ModelRegistry(std::move(specs));
}

const ModelSpec& ModelRegistry::require(const std::string& id, ModelKind kind) const {
  auto it = models_.find(id);
  if (it == models_.end()) throw ConfigError("unknown model id '" + id + "'");
  if (it->second.kind != kind)
    throw ConfigError("model '" + id + "' is a " + to_string(it->second.kind) + " model, not " + to_string(kind));
  return it->second;
}

bool truncate_utf8(std::string& text, std::size_t max_chars) {
  if (max_chars == 0 || text.size() <= max_chars) return false;
  // Count code points by their lead bytes; continuation bytes are 10xxxxxx.
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) continue;
    if (seen++ == max_chars) {
      text.resize(i);
      return true;
    }
  }
  return false;
}

std::shared_ptr<Backend> make_backend(const json& config, const std::string& base_dir) {
  auto type = config.value("type", std::string{});
  if (type == "fixture") {
    std::filesystem::path file = config.at("fixture_file").get<std::string>();
    if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
    return std::make_shared<FixtureBackend>(FixtureConfig::load(file));
  }
  if (type == "http") return std::make_shared<HttpBackend>(HttpConfig::from_json(config));
  throw ConfigError("unknown backend type '" + type + "'");
}

}  // namespace zsl
