#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace zsl {

enum class ModelKind { embedding, nli, binary, generative };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;
  // Input was cut at the model's length limit before embedding.
  bool truncated = false;
};

struct NliScores {
  double entailment = 0;
  double neutral = 0;
  double contradiction = 0;
};

struct BinaryRelevance {
  double true_confidence = 0;
};

enum class FinishReason { complete, truncated, other };

struct GenerationResult {
  std::string text;
  std::string model_id;
  FinishReason finish_reason = FinishReason::complete;
};

std::string to_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view s);

void to_json(nlohmann::json& j, const EmbeddingVector& v);
void from_json(const nlohmann::json& j, EmbeddingVector& v);
void to_json(nlohmann::json& j, const NliScores& s);
void from_json(const nlohmann::json& j, NliScores& s);
void to_json(nlohmann::json& j, const BinaryRelevance& b);
void from_json(const nlohmann::json& j, BinaryRelevance& b);
void to_json(nlohmann::json& j, const GenerationResult& g);
void from_json(const nlohmann::json& j, GenerationResult& g);

struct ModelSpec {
  std::string id;
  ModelKind kind = ModelKind::embedding;
  std::size_t dimension = 0;        // embedding models; 0 = not checked
  std::size_t max_input_chars = 0;  // 0 = unlimited
};

/// Known models for one backend. Lookups of unknown ids or the wrong kind
/// throw ConfigError.
class ModelRegistry {
 public:
  ModelRegistry() = default;
  explicit ModelRegistry(std::vector<ModelSpec> models);
  static ModelRegistry from_json(const nlohmann::json& models);

  const ModelSpec& require(const std::string& id, ModelKind kind) const;
  bool contains(const std::string& id) const { return models_.count(id) != 0; }

 private:
  std::map<std::string, ModelSpec> models_;
};

/// Uniform inference surface. Implementations must be safe to call from
/// concurrent workers.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts, const std::string& model) = 0;
  virtual NliScores nli(const std::string& premise, const std::string& hypothesis, const std::string& model) = 0;
  virtual BinaryRelevance binary_relevance(const std::string& text, const std::string& label,
                                           const std::string& model) = 0;
  virtual GenerationResult generate(const std::string& prompt, const std::string& model, double temperature) = 0;

  /// Checks that `model` is known with the given kind; throws ConfigError.
  virtual void require_model(const std::string& model, ModelKind kind) const = 0;

  /// Outbound requests attempted so far (including retries).
  virtual std::uint64_t network_calls() const { return 0; }
};

/// Builds a backend from a plan's backend entry. `type` is "fixture" or
/// "http"; relative paths resolve against `base_dir`.
std::shared_ptr<Backend> make_backend(const nlohmann::json& config, const std::string& base_dir);

/// Cuts `text` to at most `max_chars` bytes without splitting a UTF-8
/// sequence. Returns true when anything was removed.
bool truncate_utf8(std::string& text, std::size_t max_chars);

}  // namespace zsl
