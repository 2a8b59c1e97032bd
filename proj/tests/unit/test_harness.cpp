#include <doctest.h>
#include <zsl/error.hpp>
#include <zsl/error_analysis.hpp>
#include <zsl/harness.hpp>
#include <zsl/prediction_io.hpp>

#include <fstream>
#include <cmath>
#include <random>
#include <sstream>
#include <zsl/csv.hpp>

#include "../support.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_plan(const fs::path& out, const fs::path& cache) {
  auto d = test::data_dir();
  return json{{"datasets", {{{"profile", (d / "profiles/jira.json").string()}, {"data", (d / "fixtures/jira.jsonl").string()}}}},
              {"strategies",
               {{{"strategy", "embedding"}, {"backend", "offline"}, {"model", "hash-embed-64"}},
                {{"strategy", "generative"}, {"backend", "offline"}, {"model", "fixture-gpt"}}}},
              {"label_configs", {"L1", "L3"}},
              {"seed", 42},
              {"output_dir", out.string()},
              {"cache_dir", cache.string()},
              {"backends", {{"offline", {{"type", "fixture"}, {"fixture_file", (d / "fixtures/backend.json").string()}}}}},
              {"workers", 2}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("1 dataset x 2 strategies x 2 configs gives 4 cells; warm re-run is identical") {
    test::TempDir dir;
    auto plan = zsl::plan_from_json(base_plan(dir.path() / "out1", dir.path() / "cache"), dir.path());
    auto s1 = zsl::run_matrix(plan);
    CHECK(s1.cells == 4);
    CHECK(s1.failed_cells == 0);
    CHECK(s1.network_calls == 0);
    CHECK(s1.cache.misses > 0);
    std::size_t cell_dirs = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "out1" / "cells")) {
      CHECK(fs::exists(e.path() / "predictions.jsonl"));
      CHECK(fs::exists(e.path() / "evaluation.json"));
      ++cell_dirs;
    }
    CHECK(cell_dirs == 4);

    plan.output_dir = dir.path() / "out2";
    auto s2 = zsl::run_matrix(plan);
    CHECK(s2.digest == s1.digest);
    CHECK(s2.cache.misses == 0);
    for (const auto* f : {"results.json", "results.csv"})
      CHECK(slurp(dir.path() / "out1" / f) == slurp(dir.path() / "out2" / f));
    auto key = zsl::cell_key("jira", plan.strategies[0], zsl::LabelConfigId::L3);
    CHECK(slurp(dir.path() / "out1/cells" / key / "predictions.jsonl") ==
          slurp(dir.path() / "out2/cells" / key / "predictions.jsonl"));
  }

  TEST_CASE("every evaluated instance is either correct or misclassified") {
    test::TempDir dir;
    auto j = base_plan(dir.path() / "out", dir.path() / "cache");
    j["evaluation_scope"] = "test";
    auto plan = zsl::plan_from_json(j, dir.path());
    auto resolved = zsl::resolve_plan(plan);
    const auto& ds = resolved.datasets[0];
    CHECK(ds.evaluated.size() < ds.dataset.size());
    auto cell = zsl::run_cell(resolved, ds, plan.strategies[0], zsl::LabelConfigId::L1);
    REQUIRE(cell.ok);
    CHECK(cell.records.size() == ds.evaluated.size());
    auto mis = zsl::misclassifications("k", "test", ds.dataset, ds.evaluated, cell.records);
    std::size_t correct = 0;
    for (const auto& r : cell.records) {
      auto gold = std::find_if(ds.dataset.instances.begin(), ds.dataset.instances.end(),
                               [&](const auto& i) { return i.id == r.instance_id; })->gold;
      correct += r.predicted == gold;
    }
    CHECK(mis.ids.size() + correct == ds.evaluated.size());
    CHECK(cell.evaluation->total == ds.evaluated.size());
  }

  TEST_CASE("invalid plans abort before any cell runs") {
    test::TempDir dir;
    auto j = base_plan(dir.path() / "out", dir.path() / "cache");
    j["label_configs"] = {"L1", "L9"};
    CHECK_THROWS_AS(zsl::plan_from_json(j, dir.path()), zsl::ConfigError);

    auto k = base_plan(dir.path() / "out", dir.path() / "cache");
    k["strategies"][0]["model"] = "no-such-model";
    k["datasets"][0]["profile"] = (dir.path() / "missing.json").string();
    auto plan = zsl::plan_from_json(k, dir.path());
    try {
      zsl::run_matrix(plan);
      FAIL("expected ConfigError");
    } catch (const zsl::ConfigError& e) {
      std::string what = e.what();
      CHECK(what.find("no-such-model") != std::string::npos);
      CHECK(what.find("missing.json") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(dir.path() / "out" / "manifest.json"));
  }

  TEST_CASE("unreachable backend with a cold cache fails cells but the run continues") {
    test::TempDir dir;
    auto j = base_plan(dir.path() / "out", dir.path() / "cache");
    j["backends"]["remote"] = {{"type", "http"},
                               {"base_url", "http://127.0.0.1:1"},
                               {"models", {{{"id", "gpt"}, {"kind", "generative"}}}},
                               {"retry", {{"attempts", 1}, {"initial_backoff_ms", 1}}},
                               {"timeout_s", 1}};
    j["strategies"] = {{{"strategy", "embedding"}, {"backend", "offline"}, {"model", "hash-embed-64"}},
                       {{"strategy", "generative"}, {"backend", "remote"}, {"model", "gpt"}}};
    j["label_configs"] = {"L1"};
    auto s = zsl::run_matrix(zsl::plan_from_json(j, dir.path()));
    CHECK(s.cells == 2);
    CHECK(s.failed_cells == 1);
    auto manifest = json::parse(slurp(dir.path() / "out" / "manifest.json"));
    CHECK(manifest["stats"]["failed_cells"] == 1);
  }

  TEST_CASE("treatments from results") {
    test::TempDir dir;
    auto plan = zsl::plan_from_json(base_plan(dir.path() / "out", dir.path() / "cache"), dir.path());
    zsl::run_matrix(plan);
    auto t = zsl::treatments_from_results(dir.path() / "out");
    CHECK(t.size() == 4);
    for (const auto& x : t) CHECK(x.samples.size() == 1);
    CHECK_THROWS_AS(zsl::treatments_from_results(dir.path() / "out", "accuracy"), zsl::ConfigError);
  }
}

TEST_SUITE("prediction io") {
  TEST_CASE("round trip preserves Unmapped and flags; duplicates rejected") {
    zsl::PredictionRecord a;
    a.instance_id = "b";
    a.dataset = "jira";
    a.strategy = zsl::Strategy::generative;
    a.model = "m";
    a.label_config = "L1";
    a.raw_output = "dunno";
    a.flags = {zsl::flag::kTruncatedOutput};
    zsl::PredictionRecord c = a;
    c.instance_id = "a";
    c.predicted = "positive";
    c.scores = {{"positive", 0.7}, {"negative", 0.3}};
    std::stringstream ss;
    zsl::write_predictions(ss, {a, c});
    auto first_line = ss.str().substr(0, ss.str().find('\n'));
    CHECK(first_line.find("\"instance_id\":\"a\"") != std::string::npos);
    auto back = zsl::read_predictions(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].predicted == "positive");
    CHECK(back[0].scores.at("negative") == 0.3);
    CHECK_FALSE(back[1].predicted);
    CHECK(back[1].has_flag(zsl::flag::kTruncatedOutput));

    std::stringstream dup("{\"instance_id\":\"x\",\"predicted\":null}\n{\"instance_id\":\"x\",\"predicted\":null}\n");
    CHECK_THROWS_AS(zsl::read_predictions(dup), zsl::DataError);
  }

  TEST_CASE("external predictions need only id and label") {
    std::stringstream ss("{\"instance_id\":\"1\",\"predicted\":\"negative\"}\n");
    auto r = zsl::read_predictions(ss);
    CHECK(r[0].strategy == zsl::Strategy::external);
  }
}

TEST_SUITE("error analysis") {
  zsl::MisclassificationSet set(const std::string& key, std::set<std::string> ids, std::string ds = "d") {
    return {key, std::move(ds), "test", std::move(ids)};
  }

  TEST_CASE("intersection examples") {
    std::vector<zsl::MisclassificationSet> one{set("a", {"1", "2"})};
    CHECK(zsl::intersect_misclassifications(one) == std::set<std::string>{"1", "2"});
    std::vector<zsl::MisclassificationSet> disjoint{set("a", {"1"}), set("b", {"2"})};
    CHECK(zsl::intersect_misclassifications(disjoint).empty());
    std::vector<zsl::MisclassificationSet> three{set("a", {"1", "2", "3"}), set("b", {"2", "3", "4"}),
                                                 set("c", {"3", "5"})};
    CHECK(zsl::intersect_misclassifications(three) == std::set<std::string>{"3"});
  }

  TEST_CASE("intersection is monotone and a subset of every input") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<zsl::MisclassificationSet> sets;
      std::size_t prev = SIZE_MAX;
      for (int k = 0; k < 5; ++k) {
        std::set<std::string> ids;
        for (int i = 0; i < 30; ++i)
          if (rng() % 3) ids.insert(std::to_string(i));
        sets.push_back(set("r" + std::to_string(k), ids));
        auto common = zsl::intersect_misclassifications(sets);
        for (const auto& s : sets) CHECK(std::includes(s.ids.begin(), s.ids.end(), common.begin(), common.end()));
        CHECK(common.size() <= prev);
        prev = common.size();
      }
    }
  }

  TEST_CASE("mixed datasets or scopes are rejected") {
    std::vector<zsl::MisclassificationSet> mixed{set("a", {"1"}, "d1"), set("b", {"1"}, "d2")};
    CHECK_THROWS_AS(zsl::intersect_misclassifications(mixed), zsl::PreconditionError);
    auto s = set("b", {"1"});
    s.scope = "full";
    std::vector<zsl::MisclassificationSet> scopes{set("a", {"1"}), s};
    CHECK_THROWS_AS(zsl::intersect_misclassifications(scopes), zsl::PreconditionError);
    CHECK_THROWS_AS(zsl::intersect_misclassifications({}), zsl::PreconditionError);
  }

  TEST_CASE("Unmapped and failed predictions count as misclassified") {
    auto ds = test::synthetic(test::make_profile({"positive", "negative"}), {{"positive", 2}, {"negative", 1}});
    std::vector<zsl::PredictionRecord> recs(3);
    recs[0].instance_id = "positive-0";
    recs[0].predicted = "positive";
    recs[1].instance_id = "positive-1";
    recs[2].instance_id = "negative-0";
    recs[2].flags = {zsl::flag::kFailed};
    auto m = zsl::misclassifications("k", "full", ds, {0, 1, 2}, recs);
    CHECK(m.ids == std::set<std::string>{"negative-0", "positive-1"});
  }

  TEST_CASE("worksheet export has one column per run and an empty category") {
    auto ds = test::synthetic(test::make_profile({"positive", "negative"}), {{"positive", 2}});
    zsl::PredictionRecord r;
    r.instance_id = "positive-1";
    std::vector<zsl::NamedPredictions> runs{{"run_a", {r}}, {"run_b", {r}}};
    runs[1].records[0].predicted = "negative";
    std::ostringstream out;
    zsl::export_error_candidates(out, {"positive-1"}, ds, runs);
    auto rows = zsl::csv::parse(out.str());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"id", "text", "gold", "run_a", "run_b", "category"});
    CHECK(rows[1][3] == "UNMAPPED");
    CHECK(rows[1][4] == "negative");
    CHECK(rows[1][5].empty());
    std::ostringstream bad;
    CHECK_THROWS_AS(zsl::export_error_candidates(bad, {"nope"}, ds, runs), zsl::DataError);
  }

  TEST_CASE("annotation import tallies and warns") {
    std::string sheet = "id,text,category\n";
    const std::pair<const char*, int> mix[] = {{"subjectivity in annotation", 41}, {"polar facts", 15},
                                               {"politeness", 6},                  {"figurative language", 3},
                                               {"pragmatics", 3}};
    int id = 0;
    for (auto [cat, n] : mix)
      for (int i = 0; i < n; ++i) sheet += std::to_string(id++) + ",t," + cat + "\n";
    std::istringstream in(sheet);
    auto t = zsl::import_error_annotations(in);
    CHECK(t.annotated == 68);
    CHECK(t.closed);
    CHECK(std::round(t.percentages["subjectivity in annotation"] * 100) / 100 == doctest::Approx(60.29));
    CHECK(t.warnings.empty());

    std::istringstream partial("id,category\n1,polar facts\n2,\n");
    auto p = zsl::import_error_annotations(partial);
    CHECK(p.unannotated == 1);
    CHECK_FALSE(p.warnings.empty());

    std::istringstream nocol("id,text\n1,x\n");
    CHECK_THROWS_AS(zsl::import_error_annotations(nocol), zsl::DataError);
  }
}
