#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "zsl/backend.hpp"

namespace zsl {

/// SHA-256 over (kind, model, canonical request serialization).
std::string cache_key(std::string_view kind, std::string_view model, const nlohmann::json& request);

/// Content-addressed response store: one `<key>.json` file per request.
/// Writes go to a unique temp file and are renamed into place, so readers
/// never observe partial entries. The first payload stored for a key wins.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, const nlohmann::json& request, const nlohmann::json& response) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

/// Decorator that answers from a ResponseCache and forwards misses.
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<const ResponseCache> cache);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts, const std::string& model) override;
  NliScores nli(const std::string& premise, const std::string& hypothesis, const std::string& model) override;
  BinaryRelevance binary_relevance(const std::string& text, const std::string& label,
                                   const std::string& model) override;
  GenerationResult generate(const std::string& prompt, const std::string& model, double temperature) override;
  void require_model(const std::string& model, ModelKind kind) const override;
  std::uint64_t network_calls() const override { return inner_->network_calls(); }

  CacheStats stats() const { return {hits_.load(), misses_.load()}; }

 private:
  template <typename Result, typename Fetch>
  Result cached(std::string_view kind, const std::string& model, const nlohmann::json& request, Fetch&& fetch);

  std::shared_ptr<Backend> inner_;
  std::shared_ptr<const ResponseCache> cache_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace zsl
