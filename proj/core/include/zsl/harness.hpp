#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsl/backend.hpp"
#include "zsl/cache.hpp"
#include "zsl/classify.hpp"
#include "zsl/corpus.hpp"
#include "zsl/labelcfg.hpp"
#include "zsl/metrics.hpp"
#include "zsl/stats.hpp"

namespace zsl {

enum class EvaluationScope { full, test };

std::string to_string(EvaluationScope s);
EvaluationScope parse_scope(std::string_view s);

struct DatasetRef {
  std::filesystem::path profile;
  std::filesystem::path data;
};

struct StrategySpec {
  Strategy strategy = Strategy::embedding;
  std::string backend;
  std::string model;
};

struct ExperimentPlan {
  std::vector<DatasetRef> datasets;
  std::vector<StrategySpec> strategies;
  std::vector<LabelConfigId> label_configs;
  std::uint64_t seed = 0;
  EvaluationScope scope = EvaluationScope::full;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> labels_file;
  std::map<std::string, nlohmann::json> backends;
  unsigned workers = 1;
  std::size_t max_consecutive_failures = 3;
  std::size_t embedding_batch_size = 32;
  // Directory that relative paths resolve against.
  std::filesystem::path base_dir;
  // Plan document as read; hashed into the manifest.
  nlohmann::json document;
};

/// Parses a plan document. Unknown label configurations or strategies abort
/// here with ConfigError; file references are checked by resolve_plan.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentPlan load_plan(const std::filesystem::path& path);

struct LoadedDataset {
  Dataset dataset;
  std::string data_sha256;
  std::string profile_sha256;
  // Instances evaluated under the plan's scope, in dataset order.
  std::vector<std::size_t> evaluated;
};

/// Everything a run needs, checked before the first cell executes.
struct ResolvedPlan {
  ExperimentPlan plan;
  std::vector<LoadedDataset> datasets;
  LabelVocabulary vocabulary;
  std::map<std::string, std::shared_ptr<Backend>> backends;
  std::map<std::string, std::shared_ptr<CachedBackend>> cached;
};

/// Throws ConfigError listing every problem found.
ResolvedPlan resolve_plan(const ExperimentPlan& plan);

struct CellResult {
  std::string key;
  std::string dataset;
  StrategySpec strategy;
  LabelConfigId config = LabelConfigId::L1;
  bool ok = false;
  std::string error;
  std::vector<PredictionRecord> records;
  std::optional<EvaluationResult> evaluation;
  std::size_t failed_instances = 0;
};

/// Runs one matrix cell without touching the filesystem.
CellResult run_cell(const ResolvedPlan& plan, const LoadedDataset& ds, const StrategySpec& strategy,
                    LabelConfigId config);

struct RunSummary {
  std::size_t cells = 0;
  std::size_t failed_cells = 0;
  std::string digest;
  CacheStats cache;
  std::uint64_t network_calls = 0;
  std::filesystem::path output_dir;
};

/// Writes cells/<key>/{predictions.jsonl,evaluation.json}, results.json,
/// results.csv and manifest.json under the plan's output directory.
RunSummary run_matrix(const ExperimentPlan& plan);

std::string cell_key(const std::string& dataset, const StrategySpec& s, LabelConfigId config);

/// Evaluated instance indices for a scope (the whole dataset, or the test
/// split for `seed`).
std::vector<std::size_t> evaluated_indices(const Dataset& ds, EvaluationScope scope, std::uint64_t seed);

/// Scores predictions against gold for the given instances; a record that is
/// missing for an evaluated instance is an error.
EvaluationResult evaluate_predictions(const Dataset& ds, const std::vector<std::size_t>& evaluated,
                                      const std::vector<PredictionRecord>& records);

/// Treatments (strategy/model/label config) with one sample per dataset,
/// read from a results directory's results.json.
std::vector<Treatment> treatments_from_results(const std::filesystem::path& results_dir,
                                               const std::string& metric = "macro_f1");

}  // namespace zsl
