#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

#include "zsl/backend.hpp"

namespace zsl {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubles per retry
};

struct HttpConfig {
  // scheme://host[:port][/prefix]; endpoints are appended to the prefix.
  std::string base_url;
  std::string api_key;
  ModelRegistry models;
  int max_concurrency = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{60};

  /// Reads {"base_url", "api_key_env", "models", "max_concurrency",
  /// "retry": {"attempts", "initial_backoff_ms"}, "timeout_s"}. The key comes
  /// from the environment variable named by api_key_env; ZSL_BASE_URL
  /// overrides base_url when set.
  static HttpConfig from_json(const nlohmann::json& j);
};

/// Remote adapter speaking the common embeddings/chat-completions REST
/// shapes plus JSON endpoints `POST /v1/nli` and `POST /v1/binary`.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);
  ~HttpBackend() override;

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts, const std::string& model) override;
  NliScores nli(const std::string& premise, const std::string& hypothesis, const std::string& model) override;
  BinaryRelevance binary_relevance(const std::string& text, const std::string& label,
                                   const std::string& model) override;
  GenerationResult generate(const std::string& prompt, const std::string& model, double temperature) override;
  void require_model(const std::string& model, ModelKind kind) const override;
  std::uint64_t network_calls() const override { return calls_.load(); }

 private:
  nlohmann::json post(const std::string& endpoint, const nlohmann::json& body);

  HttpConfig config_;
  std::string origin_;
  std::string prefix_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace zsl
