#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "zsl/http_backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "zsl/error.hpp"

namespace zsl {

using nlohmann::json;

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("base_url must include a scheme: '" + url + "'");
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

double probability(const json& j, const char* key) {
  double p = j.at(key).get<double>();
  if (!(p >= 0.0 && p <= 1.0)) throw BackendError(std::string("remote returned ") + key + " outside [0,1]", false);
  return p;
}

}  // namespace

HttpConfig HttpConfig::from_json(const json& j) {
  HttpConfig c;
  try {
    c.base_url = j.at("base_url").get<std::string>();
    if (const char* env = std::getenv("ZSL_BASE_URL"); env && *env) c.base_url = env;
    if (j.contains("api_key_env")) {
      auto name = j["api_key_env"].get<std::string>();
      if (const char* key = std::getenv(name.c_str())) c.api_key = key;
    }
    c.models = ModelRegistry::from_json(j.at("models"));
    c.max_concurrency = j.value("max_concurrency", 4);
    if (j.contains("retry")) {
      c.retry.attempts = j["retry"].value("attempts", 3);
      c.retry.initial_backoff = std::chrono::milliseconds(j["retry"].value("initial_backoff_ms", 1000));
    }
    c.timeout = std::chrono::seconds(j.value("timeout_s", 60));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid http backend config: ") + e.what());
  }
  if (c.max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
  if (c.retry.attempts < 1) throw ConfigError("retry.attempts must be >= 1");
  return c;
}

HttpBackend::HttpBackend(HttpConfig config)
    : config_(std::move(config)),
      slots_(std::make_unique<std::counting_semaphore<>>(config_.max_concurrency)) {
  std::tie(origin_, prefix_) = split_url(config_.base_url);
}

HttpBackend::~HttpBackend() = default;

void HttpBackend::require_model(const std::string& model, ModelKind kind) const {
  config_.models.require(model, kind);
}

json HttpBackend::post(const std::string& endpoint, const json& body) {
  SlotGuard slot(*slots_);
  const std::string path = prefix_ + endpoint;
  const std::string payload = body.dump();
  std::string last_error;
  auto backoff = config_.retry.initial_backoff;
  for (int attempt = 1; attempt <= config_.retry.attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    ++calls_;
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("authentication failed (" + std::to_string(res->status) + ") for " + path);
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + (res->status == 429 ? " (rate limited)" : "");
      continue;
    }
    if (res->status < 200 || res->status >= 300)
      throw BackendError("HTTP " + std::to_string(res->status) + " from " + path + ": " + res->body, false);
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw BackendError(std::string("malformed response from ") + path + ": " + e.what(), false);
    }
  }
  throw BackendError(last_error + " after " + std::to_string(config_.retry.attempts) + " attempts", true);
}

std::vector<EmbeddingVector> HttpBackend::embed(std::span<const std::string> texts, const std::string& model) {
  const auto& spec = config_.models.require(model, ModelKind::embedding);
  if (texts.empty()) throw PreconditionError("embed called with no texts");
  std::vector<std::string> inputs(texts.begin(), texts.end());
  std::vector<bool> truncated(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) truncated[i] = truncate_utf8(inputs[i], spec.max_input_chars);

  auto res = post("/v1/embeddings", json{{"model", model}, {"input", inputs}});
  std::vector<EmbeddingVector> out(inputs.size());
  std::vector<bool> seen(inputs.size());
  try {
    const auto& data = res.at("data");
    if (data.size() != inputs.size()) throw BackendError("embedding count mismatch", false);
    for (std::size_t k = 0; k < data.size(); ++k) {
      auto index = data[k].value("index", k);
      if (index >= out.size() || seen[index]) throw BackendError("bad embedding index", false);
      seen[index] = true;
      out[index] = {data[k].at("embedding").get<std::vector<double>>(), model, truncated[index]};
      if (spec.dimension && out[index].values.size() != spec.dimension)
        throw BackendError("dimension mismatch for model '" + model + "': expected " +
                               std::to_string(spec.dimension) + ", got " +
                               std::to_string(out[index].values.size()),
                           false);
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed embeddings response: ") + e.what(), false);
  }
  return out;
}

NliScores HttpBackend::nli(const std::string& premise, const std::string& hypothesis, const std::string& model) {
  config_.models.require(model, ModelKind::nli);
  if (hypothesis.empty()) throw PreconditionError("NLI hypothesis is empty");
  auto res = post("/v1/nli", json{{"premise", premise}, {"hypothesis", hypothesis}, {"model", model}});
  try {
    NliScores s{probability(res, "entailment"), probability(res, "neutral"), probability(res, "contradiction")};
    double sum = s.entailment + s.neutral + s.contradiction;
    if (std::abs(sum - 1.0) > 1e-6) {
      if (sum <= 0) throw BackendError("NLI scores sum to zero", false);
      s.entailment /= sum;
      s.neutral /= sum;
      s.contradiction /= sum;
    }
    return s;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed NLI response: ") + e.what(), false);
  }
}

BinaryRelevance HttpBackend::binary_relevance(const std::string& text, const std::string& label,
                                              const std::string& model) {
  config_.models.require(model, ModelKind::binary);
  if (label.empty()) throw PreconditionError("binary relevance label is empty");
  auto res = post("/v1/binary", json{{"text", text}, {"label", label}, {"model", model}});
  try {
    return {probability(res, "true_confidence")};
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed binary response: ") + e.what(), false);
  }
}

GenerationResult HttpBackend::generate(const std::string& prompt, const std::string& model, double temperature) {
  config_.models.require(model, ModelKind::generative);
  if (temperature < 0) throw PreconditionError("temperature must be >= 0");
  auto res = post("/v1/chat/completions",
                  json{{"model", model},
                       {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                       {"temperature", temperature}});
  try {
    const auto& choice = res.at("choices").at(0);
    GenerationResult g;
    g.model_id = model;
    const auto& content = choice.at("message").at("content");
    g.text = content.is_null() ? "" : content.get<std::string>();
    auto reason = choice.value("finish_reason", std::string{"stop"});
    g.finish_reason = reason == "stop" ? FinishReason::complete
                      : reason == "length" ? FinishReason::truncated
                                           : FinishReason::other;
    return g;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed chat response: ") + e.what(), false);
  }
}

}  // namespace zsl
