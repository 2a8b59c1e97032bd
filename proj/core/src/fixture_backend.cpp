#include "zsl/fixture_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

#include "zsl/error.hpp"
#include "zsl/hash.hpp"

namespace zsl {

using nlohmann::json;

namespace {

constexpr std::size_t kScoringDimension = 64;
constexpr double kNliSharpness = 4.0;

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("fixture " + what + " outside [0,1]");
}

// Pulls the quoted options and the fenced instance text out of a prompt
// produced by build_prompt.
struct ParsedPrompt {
  std::vector<std::string> options;
  std::string instance;
};

std::optional<ParsedPrompt> parse_prompt(const std::string& prompt) {
  static const std::string kLead = "Give your answer as either ";
  auto lead = prompt.find(kLead);
  auto fence = prompt.find("\n```");
  if (lead == std::string::npos || fence == std::string::npos || fence < lead) return std::nullopt;
  ParsedPrompt out;
  std::size_t pos = lead + kLead.size();
  while (pos < fence) {
    auto open = prompt.find('\'', pos);
    if (open == std::string::npos || open >= fence) break;
    auto close = prompt.find("'", open + 1);
    // Options end at a quote followed by ',', ' or', or '.'.
    while (close != std::string::npos && close < fence) {
      char next = close + 1 < prompt.size() ? prompt[close + 1] : '\0';
      if (next == ',' || next == '.' || next == ' ') break;
      close = prompt.find('\'', close + 1);
    }
    if (close == std::string::npos || close >= fence) break;
    out.options.push_back(prompt.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  auto body = prompt.substr(fence + 4);
  if (body.size() >= 3 && body.compare(body.size() - 3, 3, "```") == 0) body.resize(body.size() - 3);
  out.instance = body;
  if (out.options.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::vector<std::string> hash_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<double> hash_embedding(std::string_view text, std::size_t dimension, std::uint64_t seed) {
  std::vector<double> out(dimension, 0.0);
  auto tokens = hash_tokens(text);
  if (tokens.empty()) {
    // Punctuation-only text is still text: hash it whole.
    auto first = text.find_first_not_of(" \t\r\n\v\f");
    if (first == std::string_view::npos) return out;
    tokens.emplace_back(text.substr(first));
  }
  std::vector<double> tok(dimension);
  for (const auto& t : tokens) {
    std::mt19937_64 rng(fnv1a64(t) ^ (seed * 0x9e3779b97f4a7c15ULL));
    double norm = 0;
    for (auto& x : tok) {
      // 53-bit uniform in [-1, 1); mt19937_64 output is fully specified.
      x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dimension; ++i) out[i] += tok[i] / norm;
  }
  for (auto& x : out) x /= static_cast<double>(tokens.size());
  return out;
}

FixtureConfig FixtureConfig::from_json(const json& j) {
  FixtureConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    c.models = ModelRegistry::from_json(j.at("models"));
    for (const auto& e : j.value("nli", json::array())) {
      NliScores s = e.get<NliScores>();
      check_probability(s.entailment, "entailment");
      check_probability(s.neutral, "neutral");
      check_probability(s.contradiction, "contradiction");
      if (std::abs(s.entailment + s.neutral + s.contradiction - 1.0) > 1e-6)
        throw ConfigError("fixture NLI scores must sum to 1");
      c.nli[{e.at("premise").get<std::string>(), e.at("hypothesis").get<std::string>()}] = s;
    }
    for (const auto& e : j.value("binary", json::array())) {
      double p = e.at("true_confidence").get<double>();
      check_probability(p, "true_confidence");
      c.binary[{e.at("text").get<std::string>(), e.at("label").get<std::string>()}] = p;
    }
    for (const auto& e : j.value("generate", json::array()))
      c.generations[e.at("prompt").get<std::string>()] = e.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid fixture file: ") + e.what());
  }
  return c;
}

FixtureConfig FixtureConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixture file " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

FixtureBackend::FixtureBackend(FixtureConfig config) : config_(std::move(config)) {}

void FixtureBackend::require_model(const std::string& model, ModelKind kind) const {
  config_.models.require(model, kind);
}

std::uint64_t FixtureBackend::model_seed(const std::string& model) const {
  return config_.seed ^ fnv1a64(model);
}

double FixtureBackend::similarity(std::string_view a, std::string_view b, const std::string& model) const {
  const auto seed = model_seed(model);
  return cosine(hash_embedding(a, kScoringDimension, seed), hash_embedding(b, kScoringDimension, seed));
}

std::vector<EmbeddingVector> FixtureBackend::embed(std::span<const std::string> texts, const std::string& model) {
  const auto& spec = config_.models.require(model, ModelKind::embedding);
  if (texts.empty()) throw PreconditionError("embed called with no texts");
  const std::size_t dim = spec.dimension ? spec.dimension : kScoringDimension;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::string text = t;
    bool truncated = truncate_utf8(text, spec.max_input_chars);
    out.push_back({hash_embedding(text, dim, model_seed(model)), model, truncated});
  }
  return out;
}

NliScores FixtureBackend::nli(const std::string& premise, const std::string& hypothesis, const std::string& model) {
  config_.models.require(model, ModelKind::nli);
  if (hypothesis.empty()) throw PreconditionError("NLI hypothesis is empty");
  if (auto it = config_.nli.find({premise, hypothesis}); it != config_.nli.end()) return it->second;
  // Softmax over (+k cos, 0, -k cos).
  double c = similarity(premise, hypothesis, model);
  double e = std::exp(kNliSharpness * c), n = 1.0, x = std::exp(-kNliSharpness * c);
  double z = e + n + x;
  return {e / z, n / z, x / z};
}

BinaryRelevance FixtureBackend::binary_relevance(const std::string& text, const std::string& label,
                                                 const std::string& model) {
  config_.models.require(model, ModelKind::binary);
  if (label.empty()) throw PreconditionError("binary relevance label is empty");
  if (auto it = config_.binary.find({text, label}); it != config_.binary.end()) return {it->second};
  double p = (1.0 + similarity(text, label, model)) / 2.0;
  return {std::clamp(p, 0.0, 1.0)};
}

GenerationResult FixtureBackend::generate(const std::string& prompt, const std::string& model, double temperature) {
  config_.models.require(model, ModelKind::generative);
  if (temperature < 0) throw PreconditionError("temperature must be >= 0");
  if (auto it = config_.generations.find(prompt); it != config_.generations.end())
    return {it->second, model, FinishReason::complete};
  auto parsed = parse_prompt(prompt);
  if (!parsed) return {"I cannot determine the sentiment.", model, FinishReason::complete};
  std::size_t best = 0;
  double best_sim = -2;
  for (std::size_t i = 0; i < parsed->options.size(); ++i) {
    double s = similarity(parsed->instance, parsed->options[i], model);
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return {"The sentiment is " + parsed->options[best] + ".", model, FinishReason::complete};
}

}  // namespace zsl
