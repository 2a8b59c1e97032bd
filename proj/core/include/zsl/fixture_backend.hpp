#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsl/backend.hpp"

namespace zsl {

/// Lowercased alphanumeric runs; bytes >= 0x80 count as word characters.
std::vector<std::string> hash_tokens(std::string_view text);

/// Mean of per-token seeded pseudo-random unit vectors. Whitespace-only text
/// yields the zero vector; any other text yields a nonzero vector.
std::vector<double> hash_embedding(std::string_view text, std::size_t dimension, std::uint64_t seed);

struct FixtureConfig {
  std::uint64_t seed = 0;
  ModelRegistry models;
  std::map<std::pair<std::string, std::string>, NliScores> nli;  // (premise, hypothesis)
  std::map<std::pair<std::string, std::string>, double> binary;  // (text, label)
  std::map<std::string, std::string> generations;                // prompt -> reply

  static FixtureConfig from_json(const nlohmann::json& j);
  static FixtureConfig load(const std::filesystem::path& path);
};

/// Offline backend: a pure function of (request, fixture config). Canned
/// answers win; anything else is derived from hashed embeddings so that
/// every request has a deterministic, nontrivial answer.
class FixtureBackend final : public Backend {
 public:
  explicit FixtureBackend(FixtureConfig config);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts, const std::string& model) override;
  NliScores nli(const std::string& premise, const std::string& hypothesis, const std::string& model) override;
  BinaryRelevance binary_relevance(const std::string& text, const std::string& label,
                                   const std::string& model) override;
  GenerationResult generate(const std::string& prompt, const std::string& model, double temperature) override;
  void require_model(const std::string& model, ModelKind kind) const override;

 private:
  // Each model id gets its own hash space, so fixture models disagree.
  std::uint64_t model_seed(const std::string& model) const;
  double similarity(std::string_view a, std::string_view b, const std::string& model) const;

  FixtureConfig config_;
};

}  // namespace zsl
