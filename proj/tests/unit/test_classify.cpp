#include <doctest.h>
#include <zsl/classify.hpp>
#include <zsl/error.hpp>
#include <zsl/labelcfg.hpp>

#include <functional>
#include <random>

#include "../support.hpp"

using zsl::LabelConfigId;

namespace {

// Backend answering from lambdas; unset operations throw.
struct ScriptedBackend final : zsl::Backend {
  std::function<zsl::NliScores(const std::string&)> on_nli;
  std::function<double(const std::string&)> on_binary;
  std::function<std::string(const std::string&)> on_generate;
  zsl::FinishReason finish = zsl::FinishReason::complete;
  std::string last_prompt;
  double last_temperature = -1;

  std::vector<zsl::EmbeddingVector> embed(std::span<const std::string>, const std::string&) override {
    throw zsl::BackendError("not scripted", false);
  }
  zsl::NliScores nli(const std::string&, const std::string& h, const std::string&) override { return on_nli(h); }
  zsl::BinaryRelevance binary_relevance(const std::string&, const std::string& l, const std::string&) override {
    return {on_binary(l)};
  }
  zsl::GenerationResult generate(const std::string& p, const std::string& m, double t) override {
    last_prompt = p;
    last_temperature = t;
    return {on_generate(p), m, finish};
  }
  void require_model(const std::string&, zsl::ModelKind) const override {}
};

zsl::EmbeddingVector vec(std::vector<double> v) { return {std::move(v), "m", false}; }

std::vector<zsl::CandidateLabel> l1_labels(const zsl::DatasetProfile& p) {
  return zsl::render_label_set(LabelConfigId::L1, p);
}

}  // namespace

TEST_SUITE("embedding classifier") {
  TEST_CASE("identical vector wins with score 1") {
    std::vector<std::pair<zsl::ClassId, zsl::EmbeddingVector>> labels{
        {"positive", vec({1, 0, 0})}, {"negative", vec({0, 1, 0})}, {"neutral", vec({0, 0, 1})}};
    auto r = zsl::embed_classify(vec({1, 0, 0}), labels);
    CHECK(r.predicted == "positive");
    CHECK(r.scores["positive"] == doctest::Approx(1.0));
  }

  TEST_CASE("2-D hand example") {
    std::vector<std::pair<zsl::ClassId, zsl::EmbeddingVector>> labels{{"A", vec({0.8, 0.6})}, {"B", vec({0, 1})}};
    auto r = zsl::embed_classify(vec({1, 0}), labels);
    CHECK(r.predicted == "A");
    CHECK(r.scores["A"] == doctest::Approx(0.8).epsilon(1e-12));
  }

  TEST_CASE("exact ties go to the first class") {
    std::vector<std::pair<zsl::ClassId, zsl::EmbeddingVector>> labels{
        {"positive", vec({1, 1})}, {"negative", vec({1, 1})}, {"neutral", vec({2, 2})}};
    CHECK(zsl::embed_classify(vec({1, 0}), labels).predicted == "positive");
  }

  TEST_CASE("zero instance vector is Unmapped and flagged") {
    std::vector<std::pair<zsl::ClassId, zsl::EmbeddingVector>> labels{{"a", vec({1, 0})}, {"b", vec({0, 1})}};
    auto r = zsl::embed_classify(vec({0, 0}), labels);
    CHECK_FALSE(r.predicted);
    CHECK(r.has_flag(zsl::flag::kZeroVector));
  }

  TEST_CASE("dimension mismatch is rejected") {
    CHECK_THROWS(zsl::cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}));
  }

  TEST_CASE("positive scaling never changes the prediction") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::pair<zsl::ClassId, zsl::EmbeddingVector>> labels;
      for (const char* c : {"a", "b", "c"}) {
        std::vector<double> v(8);
        for (auto& x : v) x = g(rng);
        labels.emplace_back(c, vec(v));
      }
      std::vector<double> inst(8);
      for (auto& x : inst) x = g(rng);
      auto base = zsl::embed_classify(vec(inst), labels).predicted;
      double k = scale(rng);
      for (auto& x : inst) x *= k;
      CHECK(zsl::embed_classify(vec(inst), labels).predicted == base);
    }
  }
}

TEST_SUITE("nli classifier") {
  auto profile = test::make_profile({"positive", "negative", "neutral"});

  TEST_CASE("argmax of entailment") {
    ScriptedBackend b;
    b.on_nli = [](const std::string& h) -> zsl::NliScores {
      if (h == "Positive") return {0.9, 0.05, 0.05};
      return {0.05, 0.05, 0.9};
    };
    auto r = zsl::nli_classify("great", l1_labels(profile), b, "m");
    CHECK(r.predicted == "positive");
    CHECK(r.nli_scores.size() == 3);
  }

  TEST_CASE("uniform entailment goes to first class") {
    ScriptedBackend b;
    b.on_nli = [](const std::string&) { return zsl::NliScores{1.0 / 3, 1.0 / 3, 1.0 / 3}; };
    CHECK(zsl::nli_classify("x", l1_labels(profile), b, "m").predicted == "positive");
  }

  TEST_CASE("only entailment enters the argmax") {
    ScriptedBackend b;
    b.on_nli = [](const std::string& h) -> zsl::NliScores {
      if (h == "Negative") return {0.4, 0.0, 0.6};
      return {0.1, 0.0, 0.9};
    };
    CHECK(zsl::nli_classify("x", l1_labels(profile), b, "m").predicted == "negative");
  }

  TEST_CASE("backend failure yields a failed record") {
    ScriptedBackend b;
    b.on_nli = [](const std::string&) -> zsl::NliScores { throw zsl::BackendError("down", true); };
    auto r = zsl::nli_classify("x", l1_labels(profile), b, "m");
    CHECK(r.failed());
    CHECK_FALSE(r.predicted);
    CHECK(r.error);
  }
}

TEST_SUITE("binary relevance classifier") {
  auto profile = test::make_profile({"positive", "negative", "neutral"});

  TEST_CASE("argmax of true confidence") {
    ScriptedBackend b;
    b.on_binary = [](const std::string& l) { return l == "Positive" ? 0.2 : l == "Negative" ? 0.9 : 0.3; };
    CHECK(zsl::binary_relevance_classify("x", l1_labels(profile), b, "m").predicted == "negative");
  }

  TEST_CASE("all zeros: first class, low confidence") {
    ScriptedBackend b;
    b.on_binary = [](const std::string&) { return 0.0; };
    auto r = zsl::binary_relevance_classify("x", l1_labels(profile), b, "m");
    CHECK(r.predicted == "positive");
    CHECK(r.has_flag(zsl::flag::kLowConfidence));
  }

  TEST_CASE("single label is a precondition error") {
    ScriptedBackend b;
    b.on_binary = [](const std::string&) { return 0.5; };
    auto labels = l1_labels(test::make_profile({"positive", "negative"}));
    labels.pop_back();
    CHECK_THROWS_AS(zsl::binary_relevance_classify("x", labels, b, "m"), zsl::PreconditionError);
  }
}

TEST_SUITE("prompting") {
  TEST_CASE("app review L1 prompt matches the template exactly") {
    auto p = test::shipped_profile("google_play");
    auto prompt = zsl::build_prompt(p, l1_labels(p), "T");
    CHECK(prompt.text ==
          "What is the sentiment of the following app review, which is delimited with triple backticks? Give your "
          "answer as either 'positive', 'negative', or 'neutral'.\n```T```");
    CHECK_FALSE(prompt.escaped);
  }

  TEST_CASE("noun substitution for every shipped profile") {
    for (const auto& name : test::shipped_profile_names()) {
      auto p = test::shipped_profile(name);
      auto prompt = zsl::build_prompt(p, l1_labels(p), "text").text;
      CHECK(prompt.rfind("What is the sentiment of the following " + p.instance_noun +
                             ", which is delimited with triple backticks?",
                         0) == 0);
    }
    auto jira = test::shipped_profile("jira");
    CHECK(zsl::build_prompt(jira, l1_labels(jira), "x").text ==
          "What is the sentiment of the following issue comment, which is delimited with triple backticks? Give your "
          "answer as either 'positive' or 'negative'.\n```x```");
  }

  TEST_CASE("long configurations quote the rendered labels") {
    auto p = test::shipped_profile("google_play");
    auto labels = zsl::render_label_set(LabelConfigId::L3, p);
    auto prompt = zsl::build_prompt(p, labels, "x").text;
    CHECK(prompt.find("'An app review with positive sentiment'") != std::string::npos);
  }

  TEST_CASE("embedded backtick fences are neutralized") {
    auto p = test::shipped_profile("github");
    auto prompt = zsl::build_prompt(p, l1_labels(p), "see ```code``` here");
    CHECK(prompt.escaped);
    auto body = prompt.text.substr(prompt.text.find("\n```") + 4);
    body = body.substr(0, body.size() - 3);
    CHECK(body.find("```") == std::string::npos);
  }

  TEST_CASE("empty label list is a precondition error") {
    auto p = test::shipped_profile("github");
    CHECK_THROWS_AS(zsl::build_prompt(p, {}, "x"), zsl::PreconditionError);
  }
}

TEST_SUITE("postprocessing") {
  auto profile = test::make_profile({"positive", "negative", "neutral"});

  TEST_CASE("class names in plain replies") {
    auto labels = l1_labels(profile);
    CHECK(zsl::postprocess_output("positive", LabelConfigId::L1, labels) == "positive");
    CHECK(zsl::postprocess_output("The sentiment is negative.", LabelConfigId::L1, labels) == "negative");
    CHECK_FALSE(zsl::postprocess_output("I cannot determine the sentiment.", LabelConfigId::L1, labels));
    CHECK_FALSE(zsl::postprocess_output("", LabelConfigId::L1, labels));
  }

  TEST_CASE("word boundaries and longest match") {
    auto two = l1_labels(test::make_profile({"negative", "non-negative"}));
    CHECK(zsl::postprocess_output("It is non-negative.", LabelConfigId::L1, two) == "non-negative");
    CHECK(zsl::postprocess_output("Negative.", LabelConfigId::L1, two) == "negative");
    auto labels = l1_labels(profile);
    CHECK_FALSE(zsl::postprocess_output("unpositiveness", LabelConfigId::L1, labels));
  }

  TEST_CASE("neither-nor phrasing maps to neutral") {
    auto labels = l1_labels(profile);
    CHECK(zsl::postprocess_output("It is neither positive nor negative.", LabelConfigId::L1, labels) == "neutral");
  }

  TEST_CASE("first mention wins among different classes") {
    auto labels = l1_labels(profile);
    CHECK(zsl::postprocess_output("Positive, though some might say negative.", LabelConfigId::L1, labels) ==
          "positive");
  }

  TEST_CASE("every rendered label maps back to its class") {
    for (const auto& name : test::shipped_profile_names()) {
      auto p = test::shipped_profile(name);
      for (auto cfg : zsl::kAllLabelConfigs) {
        auto labels = zsl::render_label_set(cfg, p);
        for (const auto& l : labels) {
          CHECK_MESSAGE(zsl::postprocess_output(l.text, cfg, labels) == l.cls, name, " ", zsl::to_string(cfg));
          CHECK(zsl::postprocess_output("The sentiment is: " + l.text + ".", cfg, labels) == l.cls);
        }
      }
    }
  }

  TEST_CASE("normalize_reply") {
    CHECK(zsl::normalize_reply("  The   Sentiment\nIS  \"Positive\". ") == "the sentiment is positive");
  }
}

TEST_SUITE("generative classifier") {
  auto profile = test::shipped_profile("google_play");

  TEST_CASE("canned reply, temperature zero, raw output kept") {
    ScriptedBackend b;
    b.on_generate = [](const std::string&) { return std::string("neutral"); };
    auto r = zsl::gen_classify("x", profile, l1_labels(profile), b, "gpt");
    CHECK(r.predicted == "neutral");
    CHECK(r.raw_output == "neutral");
    CHECK(b.last_temperature == 0.0);
  }

  TEST_CASE("prose with a single class mention") {
    ScriptedBackend b;
    b.on_generate = [](const std::string&) {
      return std::string("After careful reading, the author sounds negative about the update.");
    };
    CHECK(zsl::gen_classify("x", profile, l1_labels(profile), b, "gpt").predicted == "negative");
  }

  TEST_CASE("empty reply is Unmapped; truncation is flagged") {
    ScriptedBackend b;
    b.on_generate = [](const std::string&) { return std::string(); };
    b.finish = zsl::FinishReason::truncated;
    auto r = zsl::gen_classify("x", profile, l1_labels(profile), b, "gpt");
    CHECK_FALSE(r.predicted);
    CHECK_FALSE(r.failed());
    CHECK(r.has_flag(zsl::flag::kTruncatedOutput));
  }
}
