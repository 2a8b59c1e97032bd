#include "zsl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "zsl/csv.hpp"
#include "zsl/error.hpp"
#include "zsl/hash.hpp"
#include "zsl/prediction_io.hpp"

namespace zsl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve_path(const fs::path& base, const fs::path& p) { return p.is_relative() ? base / p : p; }

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string treatment_name(const StrategySpec& s, LabelConfigId config) {
  return to_string(s.strategy) + "/" + s.model + "/" + to_string(config);
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("plan is missing '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

std::string to_string(EvaluationScope s) { return s == EvaluationScope::full ? "full" : "test"; }

EvaluationScope parse_scope(std::string_view s) {
  if (s == "full") return EvaluationScope::full;
  if (s == "test") return EvaluationScope::test;
  throw ConfigError("evaluation_scope must be 'full' or 'test', got '" + std::string(s) + "'");
}

std::string cell_key(const std::string& dataset, const StrategySpec& s, LabelConfigId config) {
  return sanitize(dataset) + "__" + to_string(s.strategy) + "__" + sanitize(s.model) + "__" + to_string(config);
}

ExperimentPlan plan_from_json(const json& j, const fs::path& base_dir) {
  ExperimentPlan p;
  p.base_dir = base_dir;
  p.document = j;
  try {
    for (const auto& d : required<json>(j, "datasets"))
      p.datasets.push_back({d.at("profile").get<std::string>(), d.at("data").get<std::string>()});
    for (const auto& s : required<json>(j, "strategies")) {
      StrategySpec spec;
      spec.strategy = parse_strategy(s.at("strategy").get<std::string>());
      spec.backend = s.at("backend").get<std::string>();
      spec.model = s.at("model").get<std::string>();
      p.strategies.push_back(std::move(spec));
    }
    for (const auto& l : required<json>(j, "label_configs")) p.label_configs.push_back(parse_label_config(l.get<std::string>()));
    p.seed = j.value("seed", std::uint64_t{0});
    p.scope = parse_scope(j.value("evaluation_scope", std::string{"full"}));
    p.output_dir = resolve_path(base_dir, required<std::string>(j, "output_dir"));
    if (j.contains("cache_dir")) p.cache_dir = resolve_path(base_dir, j["cache_dir"].get<std::string>());
    if (j.contains("labels_file")) p.labels_file = resolve_path(base_dir, j["labels_file"].get<std::string>());
    const json backends = j.value("backends", json::object());
    for (const auto& [name, cfg] : backends.items()) p.backends[name] = cfg;
    p.workers = j.value("workers", 1u);
    p.max_consecutive_failures = j.value("max_consecutive_failures", std::size_t{3});
    p.embedding_batch_size = j.value("embedding_batch_size", std::size_t{32});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid plan: ") + e.what());
  }
  if (p.workers == 0) p.workers = 1;
  if (p.embedding_batch_size == 0) throw ConfigError("embedding_batch_size must be positive");
  if (p.max_consecutive_failures == 0) throw ConfigError("max_consecutive_failures must be positive");
  return p;
}

ExperimentPlan load_plan(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return plan_from_json(j, path.parent_path());
}

std::vector<std::size_t> evaluated_indices(const Dataset& ds, EvaluationScope scope, std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (scope == EvaluationScope::full) {
    out.resize(ds.instances.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  auto split = stratified_split(ds, seed);
  std::set<std::string> test(split.test.begin(), split.test.end());
  for (std::size_t i = 0; i < ds.instances.size(); ++i)
    if (test.count(ds.instances[i].id)) out.push_back(i);
  return out;
}

ResolvedPlan resolve_plan(const ExperimentPlan& plan) {
  ResolvedPlan r{plan, {}, LabelVocabulary::builtin(), {}, {}};
  std::vector<std::string> problems;
  auto attempt = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      problems.push_back(what + ": " + e.what());
    }
  };

  if (plan.datasets.empty()) problems.push_back("plan lists no datasets");
  if (plan.strategies.empty()) problems.push_back("plan lists no strategies");
  if (plan.label_configs.empty()) problems.push_back("plan lists no label configurations");

  std::set<std::string> names;
  for (const auto& ref : plan.datasets) {
    attempt("dataset " + ref.data.string(), [&] {
      auto profile_path = resolve_path(plan.base_dir, ref.profile);
      auto data_path = resolve_path(plan.base_dir, ref.data);
      LoadedDataset ld;
      ld.dataset = load_dataset(data_path, load_profile(profile_path));
      ld.data_sha256 = sha256_file(data_path);
      ld.profile_sha256 = sha256_file(profile_path);
      ld.evaluated = evaluated_indices(ld.dataset, plan.scope, plan.seed);
      if (ld.evaluated.empty()) throw DataError("nothing to evaluate");
      if (!names.insert(ld.dataset.profile.name).second)
        throw ConfigError("duplicate dataset name '" + ld.dataset.profile.name + "'");
      r.datasets.push_back(std::move(ld));
    });
  }

  if (plan.labels_file) attempt("labels file", [&] { r.vocabulary = LabelVocabulary::load(*plan.labels_file); });

  std::shared_ptr<const ResponseCache> cache;
  if (plan.cache_dir) attempt("cache", [&] { cache = std::make_shared<const ResponseCache>(*plan.cache_dir); });
  for (const auto& [name, cfg] : plan.backends) {
    attempt("backend '" + name + "'", [&] {
      auto backend = make_backend(cfg, plan.base_dir.string());
      if (cache) {
        auto wrapped = std::make_shared<CachedBackend>(backend, cache);
        r.cached[name] = wrapped;
        backend = wrapped;
      }
      r.backends[name] = backend;
    });
  }

  for (const auto& s : plan.strategies) {
    attempt("strategy " + to_string(s.strategy) + "/" + s.model, [&] {
      auto it = r.backends.find(s.backend);
      if (it == r.backends.end()) {
        if (plan.backends.count(s.backend)) return;  // already reported
        throw ConfigError("unknown backend '" + s.backend + "'");
      }
      it->second->require_model(s.model, model_kind_for(s.strategy));
    });
  }

  if (!problems.empty()) {
    std::string msg = "plan validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return r;
}

EvaluationResult evaluate_predictions(const Dataset& ds, const std::vector<std::size_t>& evaluated,
                                      const std::vector<PredictionRecord>& records) {
  std::map<std::string, const PredictionRecord*> by_id;
  std::set<std::string> known;
  for (const auto& inst : ds.instances) known.insert(inst.id);
  for (const auto& r : records) {
    if (!known.count(r.instance_id)) throw DataError("prediction for unknown instance '" + r.instance_id + "'");
    by_id[r.instance_id] = &r;
  }
  std::vector<ClassId> gold;
  std::vector<std::optional<ClassId>> pred;
  for (auto i : evaluated) {
    const auto& inst = ds.instances[i];
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) throw DataError("no prediction for instance '" + inst.id + "'");
    gold.push_back(inst.gold);
    pred.push_back(it->second->failed() ? std::nullopt : it->second->predicted);
  }
  return evaluate(confusion(gold, pred, ds.profile.classes));
}

CellResult run_cell(const ResolvedPlan& plan, const LoadedDataset& ds, const StrategySpec& strategy,
                    LabelConfigId config) {
  CellResult c;
  const auto& profile = ds.dataset.profile;
  c.key = cell_key(profile.name, strategy, config);
  c.dataset = profile.name;
  c.strategy = strategy;
  c.config = config;
  try {
    auto labels = render_label_set(config, profile, plan.vocabulary);
    auto& backend = *plan.backends.at(strategy.backend);
    const auto& model = strategy.model;
    std::size_t consecutive = 0;

    auto accept = [&](PredictionRecord r, const Instance& inst) {
      r.instance_id = inst.id;
      r.dataset = profile.name;
      r.model = model;
      r.label_config = to_string(config);
      if (r.failed()) {
        ++c.failed_instances;
        if (++consecutive >= plan.plan.max_consecutive_failures)
          throw BackendError("backend unavailable after " + std::to_string(consecutive) +
                                 " consecutive failures: " + r.error.value_or("?"),
                             true);
      } else {
        consecutive = 0;
      }
      c.records.push_back(std::move(r));
    };

    const auto& instances = ds.dataset.instances;
    if (strategy.strategy == Strategy::embedding) {
      std::vector<std::string> label_texts;
      for (const auto& l : labels) label_texts.push_back(l.text);
      auto label_vecs = backend.embed(label_texts, model);
      std::vector<std::pair<ClassId, EmbeddingVector>> pairs;
      for (std::size_t k = 0; k < labels.size(); ++k) pairs.emplace_back(labels[k].cls, std::move(label_vecs[k]));

      const std::size_t batch = plan.plan.embedding_batch_size;
      for (std::size_t start = 0; start < ds.evaluated.size(); start += batch) {
        auto end = std::min(start + batch, ds.evaluated.size());
        std::vector<std::string> texts;
        for (auto k = start; k < end; ++k) texts.push_back(instances[ds.evaluated[k]].text);
        std::vector<EmbeddingVector> vecs;
        std::string failure;
        try {
          vecs = backend.embed(texts, model);
        } catch (const BackendError& e) {
          failure = e.what();
        }
        for (auto k = start; k < end; ++k) {
          const auto& inst = instances[ds.evaluated[k]];
          if (!failure.empty()) {
            PredictionRecord r;
            r.strategy = Strategy::embedding;
            r.flags.push_back(flag::kFailed);
            r.error = failure;
            accept(std::move(r), inst);
          } else {
            accept(embed_classify(vecs[k - start], pairs), inst);
          }
        }
      }
    } else {
      for (auto i : ds.evaluated) {
        const auto& inst = instances[i];
        switch (strategy.strategy) {
          case Strategy::nli:
            accept(nli_classify(inst.text, labels, backend, model), inst);
            break;
          case Strategy::binary:
            accept(binary_relevance_classify(inst.text, labels, backend, model), inst);
            break;
          case Strategy::generative:
            accept(gen_classify(inst.text, profile, labels, backend, model), inst);
            break;
          default:
            throw ConfigError("strategy '" + to_string(strategy.strategy) + "' cannot be run");
        }
      }
    }
    c.evaluation = evaluate_predictions(ds.dataset, ds.evaluated, c.records);
    c.ok = true;
  } catch (const std::exception& e) {
    c.ok = false;
    c.error = e.what();
    c.records.clear();
    c.evaluation.reset();
  }
  return c;
}

RunSummary run_matrix(const ExperimentPlan& plan) {
  const auto started = std::chrono::steady_clock::now();
  auto resolved = resolve_plan(plan);

  struct CellSpec {
    const LoadedDataset* ds;
    const StrategySpec* strategy;
    LabelConfigId config;
  };
  std::vector<CellSpec> specs;
  for (const auto& ds : resolved.datasets)
    for (const auto& s : plan.strategies)
      for (auto cfg : plan.label_configs) specs.push_back({&ds, &s, cfg});

  const fs::path out = plan.output_dir;
  fs::create_directories(out / "cells");
  if (plan.scope == EvaluationScope::test) {
    fs::create_directories(out / "splits");
    for (const auto& ds : resolved.datasets)
      write_text(out / "splits" / (sanitize(ds.dataset.profile.name) + ".json"),
                 split_to_json(stratified_split(ds.dataset, plan.seed)).dump(2) + "\n");
  }

  std::vector<CellResult> results(specs.size());
  std::vector<std::string> prediction_digests(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::string io_error;
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1)) {
      const auto& s = specs[i];
      results[i] = run_cell(resolved, *s.ds, *s.strategy, s.config);
      auto& c = results[i];
      try {
        auto dir = out / "cells" / c.key;
        fs::create_directories(dir);
        if (c.ok) {
          std::ostringstream buf;
          write_predictions(buf, c.records);
          prediction_digests[i] = sha256_hex(buf.str());
          write_text(dir / "predictions.jsonl", buf.str());
          write_text(dir / "evaluation.json", to_json(*c.evaluation).dump(2) + "\n");
        } else {
          fs::remove(dir / "predictions.jsonl");
          fs::remove(dir / "evaluation.json");
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mu);
        io_error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(plan.workers, std::max<std::size_t>(specs.size(), 1));
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (!io_error.empty()) throw Error("writing results failed: " + io_error);

  RunSummary summary;
  summary.output_dir = out;
  summary.cells = results.size();

  json datasets = json::array();
  for (const auto& ds : resolved.datasets) {
    datasets.push_back(json{{"name", ds.dataset.profile.name},
                            {"data_sha256", ds.data_sha256},
                            {"profile_sha256", ds.profile_sha256},
                            {"instances", ds.dataset.size()},
                            {"dropped", ds.dataset.dropped},
                            {"evaluated", ds.evaluated.size()}});
  }

  json cells = json::array();
  json results_doc = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& c = results[i];
    json cell{{"key", c.key},
              {"dataset", c.dataset},
              {"strategy", to_string(c.strategy.strategy)},
              {"model", c.strategy.model},
              {"label_config", to_string(c.config)},
              {"status", c.ok ? "ok" : "failed"}};
    if (c.ok) {
      std::size_t unmapped = 0;
      for (const auto& r : c.records) unmapped += r.predicted ? 0 : 1;
      cell["predictions_sha256"] = prediction_digests[i];
      cell["instances"] = c.records.size();
      cell["failed_instances"] = c.failed_instances;
      cell["unmapped"] = unmapped;
      cell["macro_f1"] = c.evaluation->macro_f1;
      cell["micro_f1"] = c.evaluation->micro_f1;
      json entry = cell;
      entry["evaluation"] = to_json(*c.evaluation);
      results_doc.push_back(entry);
    } else {
      ++summary.failed_cells;
      cell["error"] = c.error;
    }
    cells.push_back(cell);
  }

  json reproducible{{"plan_sha256", sha256_hex(plan.document.dump())},
                    {"seed", plan.seed},
                    {"evaluation_scope", to_string(plan.scope)},
                    {"datasets", datasets},
                    {"cells", cells}};
  summary.digest = sha256_hex(reproducible.dump());

  for (const auto& [name, cb] : resolved.cached) {
    auto s = cb->stats();
    summary.cache.hits += s.hits;
    summary.cache.misses += s.misses;
  }
  for (const auto& [name, b] : resolved.backends) summary.network_calls += b->network_calls();

  json manifest = reproducible;
  manifest["digest"] = summary.digest;
  manifest["stats"] = json{
      {"cache_hits", summary.cache.hits},
      {"cache_misses", summary.cache.misses},
      {"network_calls", summary.network_calls},
      {"failed_cells", summary.failed_cells},
      {"wall_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  write_text(out / "results.json", results_doc.dump(2) + "\n");

  // Wide table: one row per treatment, Mac/Mic columns per dataset.
  std::ofstream table(out / "results.csv", std::ios::binary | std::ios::trunc);
  std::vector<std::string> header{"treatment"};
  for (const auto& ds : resolved.datasets) {
    header.push_back(ds.dataset.profile.name + " Mac");
    header.push_back(ds.dataset.profile.name + " Mic");
  }
  csv::write_row(table, header);
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& s : plan.strategies) {
    for (auto cfg : plan.label_configs) {
      std::vector<std::string> row{treatment_name(s, cfg)};
      for (const auto& ds : resolved.datasets) {
        auto key = cell_key(ds.dataset.profile.name, s, cfg);
        auto it = std::find_if(results.begin(), results.end(), [&](const CellResult& c) { return c.key == key; });
        if (it != results.end() && it->ok) {
          row.push_back(fmt(it->evaluation->macro_f1));
          row.push_back(fmt(it->evaluation->micro_f1));
        } else {
          row.emplace_back();
          row.emplace_back();
        }
      }
      csv::write_row(table, row);
    }
  }
  return summary;
}

std::vector<Treatment> treatments_from_results(const fs::path& results_dir, const std::string& metric) {
  if (metric != "macro_f1" && metric != "micro_f1") throw ConfigError("metric must be macro_f1 or micro_f1");
  std::ifstream in(results_dir / "results.json");
  if (!in) throw DataError("no results.json in " + results_dir.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("results.json: ") + e.what());
  }
  std::vector<Treatment> out;
  std::map<std::string, std::size_t> index;
  for (const auto& e : doc) {
    auto name = e.at("strategy").get<std::string>() + "/" + e.at("model").get<std::string>() + "/" +
                e.at("label_config").get<std::string>();
    auto [it, fresh] = index.emplace(name, out.size());
    if (fresh) out.push_back({name, {}});
    out[it->second].samples.push_back(e.at(metric).get<double>());
  }
  return out;
}

}  // namespace zsl
