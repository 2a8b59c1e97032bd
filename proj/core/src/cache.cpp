#include "zsl/cache.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "zsl/error.hpp"
#include "zsl/hash.hpp"

namespace zsl {

using nlohmann::json;
namespace fs = std::filesystem;

std::string cache_key(std::string_view kind, std::string_view model, const json& request) {
  std::string material;
  material.append(kind).push_back('\0');
  material.append(model).push_back('\0');
  material += request.dump();
  return sha256_hex(material);
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path ResponseCache::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<json> ResponseCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  try {
    auto entry = json::parse(in);
    return std::optional<json>(entry.at("response"));
  } catch (const json::exception&) {
    // A corrupt entry behaves as a miss and is overwritten on the next put.
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const json& request, const json& response) const {
  const auto target = path_for(key);
  if (get(key)) return;
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream tmp_name;
  tmp_name << "." << key << ".tmp." << ::getpid() << "." << std::hash<std::thread::id>{}(std::this_thread::get_id())
           << "." << counter.fetch_add(1);
  const auto tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry " + tmp.string());
    json entry{{"key", key}, {"request", request}, {"response", response}};
    out << entry.dump() << '\n';
    if (!out.flush()) throw Error("cannot write cache entry " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot publish cache entry " + target.string());
  }
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<const ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

void CachedBackend::require_model(const std::string& model, ModelKind kind) const {
  inner_->require_model(model, kind);
}

template <typename Result, typename Fetch>
Result CachedBackend::cached(std::string_view kind, const std::string& model, const json& request, Fetch&& fetch) {
  const auto key = cache_key(kind, model, request);
  if (auto hit = cache_->get(key)) {
    ++hits_;
    return hit->get<Result>();
  }
  ++misses_;
  Result result = fetch();
  cache_->put(key, request, json(result));
  return result;
}

std::vector<EmbeddingVector> CachedBackend::embed(std::span<const std::string> texts, const std::string& model) {
  inner_->require_model(model, ModelKind::embedding);
  if (texts.empty()) throw PreconditionError("embed called with no texts");
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> missing;
  std::vector<std::string> keys(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = cache_key("embed", model, json{{"input", texts[i]}});
    if (auto hit = cache_->get(keys[i])) {
      ++hits_;
      out[i] = hit->get<EmbeddingVector>();
    } else {
      ++misses_;
      missing.push_back(i);
    }
  }
  if (!missing.empty()) {
    std::vector<std::string> batch;
    batch.reserve(missing.size());
    for (auto i : missing) batch.push_back(texts[i]);
    auto fresh = inner_->embed(batch, model);
    if (fresh.size() != batch.size()) throw BackendError("backend returned wrong number of embeddings", false);
    for (std::size_t k = 0; k < missing.size(); ++k) {
      auto i = missing[k];
      cache_->put(keys[i], json{{"input", texts[i]}}, json(fresh[k]));
      out[i] = std::move(fresh[k]);
    }
  }
  return out;
}

NliScores CachedBackend::nli(const std::string& premise, const std::string& hypothesis, const std::string& model) {
  inner_->require_model(model, ModelKind::nli);
  return cached<NliScores>("nli", model, json{{"premise", premise}, {"hypothesis", hypothesis}},
                           [&] { return inner_->nli(premise, hypothesis, model); });
}

BinaryRelevance CachedBackend::binary_relevance(const std::string& text, const std::string& label,
                                                const std::string& model) {
  inner_->require_model(model, ModelKind::binary);
  return cached<BinaryRelevance>("binary", model, json{{"text", text}, {"label", label}},
                                 [&] { return inner_->binary_relevance(text, label, model); });
}

GenerationResult CachedBackend::generate(const std::string& prompt, const std::string& model, double temperature) {
  inner_->require_model(model, ModelKind::generative);
  return cached<GenerationResult>("generate", model, json{{"prompt", prompt}, {"temperature", temperature}},
                                  [&] { return inner_->generate(prompt, model, temperature); });
}

}  // namespace zsl
