#include "zsl/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "zsl/error.hpp"

namespace zsl {

namespace {

constexpr double kTemperature = 0.0;

bool is_word(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

PredictionRecord failed_record(Strategy strategy, const std::string& why) {
  PredictionRecord r;
  r.strategy = strategy;
  r.flags.push_back(flag::kFailed);
  r.error = why;
  return r;
}

void require_labels(std::span<const CandidateLabel> labels) {
  if (labels.size() < 2) throw PreconditionError("at least two candidate labels are required");
}

void decide(PredictionRecord& r, const std::vector<ScoredClass>& scored) {
  for (const auto& [cls, s] : scored) r.scores[cls] = s;
  r.predicted = scored[argmax_first(scored)].first;
}

// Occurrences of `needle` in `hay` that sit on word boundaries.
std::vector<std::size_t> word_matches(const std::string& hay, const std::string& needle) {
  std::vector<std::size_t> out;
  if (needle.empty()) return out;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    bool left = pos == 0 || hay[pos - 1] == ' ';
    auto end = pos + needle.size();
    bool right = end == hay.size() || hay[end] == ' ';
    if (left && right) out.push_back(pos);
  }
  return out;
}

struct Match {
  ClassId cls;
  std::size_t length;
  std::size_t position;
};

// Picks the longest match; equal lengths go to the earliest mention; a
// remaining tie between distinct classes is ambiguous.
std::optional<ClassId> resolve(std::vector<Match> matches) {
  if (matches.empty()) return std::nullopt;
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.length != b.length) return a.length > b.length;
    return a.position < b.position;
  });
  const auto& best = matches.front();
  for (std::size_t i = 1; i < matches.size(); ++i) {
    const auto& m = matches[i];
    if (m.length != best.length || m.position != best.position) break;
    if (m.cls != best.cls) return std::nullopt;
  }
  return best.cls;
}

std::set<std::string> token_set(const std::string& normalized) {
  std::set<std::string> out;
  std::istringstream in(normalized);
  for (std::string t; in >> t;) out.insert(t);
  return out;
}

struct Name {
  ClassId cls;
  std::string text;
};

// Adds "neither <a> nor <b>" for the neutral class, built from the other
// classes' phrases.
void add_neither_phrase(std::vector<Name>& names) {
  std::vector<std::string> polar;
  bool has_neutral = false;
  for (const auto& n : names) {
    if (n.cls == "neutral") {
      has_neutral = true;
    } else {
      polar.push_back(n.text);
    }
  }
  if (!has_neutral || polar.size() < 2) return;
  std::string phrase = "neither";
  for (std::size_t i = 0; i < polar.size(); ++i) phrase += (i ? " nor " : " ") + polar[i];
  names.push_back({"neutral", phrase});
}

// Longer phrases claim their span first, so "negative" inside "neither
// positive nor negative" does not count separately.
std::optional<ClassId> claim_and_resolve(const std::string& norm, std::vector<Name> names) {
  std::stable_sort(names.begin(), names.end(),
                   [](const Name& a, const Name& b) { return a.text.size() > b.text.size(); });
  std::vector<std::pair<std::size_t, std::size_t>> claimed;
  std::vector<Match> matches;
  for (const auto& n : names) {
    for (auto pos : word_matches(norm, n.text)) {
      auto end = pos + n.text.size();
      bool overlaps = std::any_of(claimed.begin(), claimed.end(),
                                  [&](const auto& span) { return pos < span.second && span.first < end; });
      if (overlaps) continue;
      claimed.emplace_back(pos, end);
      matches.push_back({n.cls, n.text.size(), pos});
    }
  }
  return resolve(std::move(matches));
}

std::optional<ClassId> match_full_labels(const std::string& norm, std::span<const CandidateLabel> labels) {
  std::vector<Name> names;
  for (const auto& l : labels) names.push_back({l.cls, normalize_reply(l.text)});
  add_neither_phrase(names);
  return claim_and_resolve(norm, std::move(names));
}

// Counts how many of each label's distinguishing words the reply contains.
// Highest count wins; equal counts go to the label where those words make
// up the larger share.
std::optional<ClassId> match_overlap(const std::string& norm, std::span<const CandidateLabel> labels) {
  std::vector<std::set<std::string>> tokens;
  for (const auto& l : labels) tokens.push_back(token_set(normalize_reply(l.text)));
  std::set<std::string> shared = tokens.front();
  for (const auto& t : tokens) {
    std::set<std::string> keep;
    std::set_intersection(shared.begin(), shared.end(), t.begin(), t.end(), std::inserter(keep, keep.end()));
    shared = std::move(keep);
  }
  const auto reply = token_set(norm);

  std::optional<std::size_t> best;
  std::size_t best_hits = 0;
  double best_share = 0;
  bool tie = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t distinct = 0, hits = 0;
    for (const auto& t : tokens[i]) {
      if (shared.count(t)) continue;
      ++distinct;
      hits += reply.count(t);
    }
    if (hits == 0) continue;
    double share = static_cast<double>(hits) / static_cast<double>(distinct);
    if (!best || hits > best_hits || (hits == best_hits && share > best_share)) {
      best = i;
      best_hits = hits;
      best_share = share;
      tie = false;
    } else if (hits == best_hits && share == best_share) {
      tie = true;
    }
  }
  if (!best || tie) return std::nullopt;
  return labels[*best].cls;
}

std::optional<ClassId> match_sentiment_names(const std::string& norm, std::span<const CandidateLabel> labels) {
  std::vector<Name> names;
  for (const auto& l : labels) names.push_back({l.cls, normalize_reply(l.cls)});
  add_neither_phrase(names);
  return claim_and_resolve(norm, std::move(names));
}

std::string quote_options(const std::vector<std::string>& opts) {
  std::string out;
  for (std::size_t i = 0; i < opts.size(); ++i) {
    if (i > 0) {
      if (opts.size() > 2) out += ",";
      out += " ";
      if (i + 1 == opts.size()) out += "or ";
    }
    out += "'" + opts[i] + "'";
  }
  return out;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::embedding:
      return "embedding";
    case Strategy::nli:
      return "nli";
    case Strategy::binary:
      return "binary";
    case Strategy::generative:
      return "generative";
    case Strategy::external:
      return "external";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "embedding") return Strategy::embedding;
  if (s == "nli") return Strategy::nli;
  if (s == "binary") return Strategy::binary;
  if (s == "generative") return Strategy::generative;
  if (s == "external") return Strategy::external;
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

ModelKind model_kind_for(Strategy s) {
  switch (s) {
    case Strategy::embedding:
      return ModelKind::embedding;
    case Strategy::nli:
      return ModelKind::nli;
    case Strategy::binary:
      return ModelKind::binary;
    case Strategy::generative:
      return ModelKind::generative;
    case Strategy::external:
      break;
  }
  throw ConfigError("external predictions have no backend model");
}

bool PredictionRecord::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::size_t argmax_first(std::span<const ScoredClass> scores) {
  if (scores.empty()) throw PreconditionError("argmax over no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i].second > scores[best].second) best = i;
  return best;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw PreconditionError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw PreconditionError("cosine of a zero vector is undefined");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

PredictionRecord embed_classify(const EmbeddingVector& instance,
                                std::span<const std::pair<ClassId, EmbeddingVector>> labels) {
  if (labels.empty()) throw PreconditionError("no label vectors");
  PredictionRecord r;
  r.strategy = Strategy::embedding;
  r.model = instance.model_id;
  if (instance.truncated) r.flags.push_back(flag::kTruncatedInput);
  for (const auto& [cls, v] : labels) {
    if (v.values.size() != instance.values.size())
      throw PreconditionError("dimension mismatch between instance and label '" + cls + "'");
    if (std::all_of(v.values.begin(), v.values.end(), [](double x) { return x == 0.0; }))
      throw PreconditionError("label vector for '" + cls + "' is zero");
  }
  if (std::all_of(instance.values.begin(), instance.values.end(), [](double x) { return x == 0.0; })) {
    r.flags.push_back(flag::kZeroVector);
    r.error = "instance embedding is the zero vector";
    return r;
  }
  std::vector<ScoredClass> scored;
  scored.reserve(labels.size());
  for (const auto& [cls, v] : labels) scored.emplace_back(cls, cosine_similarity(instance.values, v.values));
  decide(r, scored);
  return r;
}

PredictionRecord nli_classify(const std::string& instance_text, std::span<const CandidateLabel> labels,
                              Backend& backend, const std::string& model) {
  require_labels(labels);
  PredictionRecord r;
  r.strategy = Strategy::nli;
  r.model = model;
  std::vector<ScoredClass> scored;
  try {
    for (const auto& l : labels) {
      auto s = backend.nli(instance_text, l.text, model);
      r.nli_scores[l.cls] = s;
      scored.emplace_back(l.cls, s.entailment);
    }
  } catch (const BackendError& e) {
    auto f = failed_record(Strategy::nli, e.what());
    f.model = model;
    return f;
  }
  decide(r, scored);
  return r;
}

PredictionRecord binary_relevance_classify(const std::string& instance_text, std::span<const CandidateLabel> labels,
                                           Backend& backend, const std::string& model) {
  require_labels(labels);
  PredictionRecord r;
  r.strategy = Strategy::binary;
  r.model = model;
  std::vector<ScoredClass> scored;
  try {
    for (const auto& l : labels) scored.emplace_back(l.cls, backend.binary_relevance(instance_text, l.text, model).true_confidence);
  } catch (const BackendError& e) {
    auto f = failed_record(Strategy::binary, e.what());
    f.model = model;
    return f;
  }
  decide(r, scored);
  if (std::all_of(scored.begin(), scored.end(), [](const ScoredClass& s) { return s.second == 0.0; }))
    r.flags.push_back(flag::kLowConfidence);
  return r;
}

Prompt build_prompt(const DatasetProfile& profile, std::span<const CandidateLabel> labels,
                    const std::string& instance_text) {
  if (labels.empty()) throw PreconditionError("prompt needs at least one candidate label");
  std::vector<std::string> options;
  for (const auto& l : labels) {
    // Original labels appear as the lowercase class names.
    options.push_back(l.config == LabelConfigId::L1 ? l.cls : l.text);
  }

  Prompt p;
  std::string body;
  body.reserve(instance_text.size());
  for (std::size_t i = 0; i < instance_text.size(); ++i) {
    body.push_back(instance_text[i]);
    // Break any backtick run with U+200B so the instance cannot close the fence.
    if (instance_text[i] == '`' && i + 1 < instance_text.size() && instance_text[i + 1] == '`') {
      body += "\xE2\x80\x8B";
      p.escaped = true;
    }
  }
  p.text = "What is the sentiment of the following " + profile.instance_noun +
           ", which is delimited with triple backticks? Give your answer as either " + quote_options(options) +
           ".\n```" + body + "```";
  return p;
}

std::string normalize_reply(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto c = static_cast<unsigned char>(raw[i]);
    bool keep = is_word(c);
    if (c == '-') {
      keep = i > 0 && i + 1 < raw.size() && is_word(static_cast<unsigned char>(raw[i - 1])) &&
             is_word(static_cast<unsigned char>(raw[i + 1]));
    }
    if (keep) {
      out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!out.empty() && out.back() != ' ') {
      out.push_back(' ');
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::optional<ClassId> postprocess_output(const std::string& raw, LabelConfigId config,
                                          std::span<const CandidateLabel> labels) {
  if (labels.empty()) return std::nullopt;
  const auto norm = normalize_reply(raw);
  if (norm.empty()) return std::nullopt;
  if (auto c = match_full_labels(norm, labels)) return c;
  if (is_long_config(config)) {
    if (auto c = match_overlap(norm, labels)) return c;
  }
  return match_sentiment_names(norm, labels);
}

PredictionRecord gen_classify(const std::string& instance_text, const DatasetProfile& profile,
                              std::span<const CandidateLabel> labels, Backend& backend, const std::string& model) {
  auto prompt = build_prompt(profile, labels, instance_text);
  PredictionRecord r;
  r.strategy = Strategy::generative;
  r.model = model;
  if (prompt.escaped) r.flags.push_back(flag::kPromptEscaped);
  GenerationResult g;
  try {
    g = backend.generate(prompt.text, model, kTemperature);
  } catch (const BackendError& e) {
    r.flags.push_back(flag::kFailed);
    r.error = e.what();
    r.raw_output = "";
    return r;
  }
  r.raw_output = g.text;
  if (g.finish_reason == FinishReason::truncated) r.flags.push_back(flag::kTruncatedOutput);
  r.predicted = postprocess_output(g.text, labels.front().config, labels);
  return r;
}

}  // namespace zsl
