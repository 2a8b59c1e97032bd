#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsl/classify.hpp"

namespace zsl {

nlohmann::json to_json(const PredictionRecord& r);
/// Lenient reader: only "instance_id" and "predicted" are required, so
/// externally produced prediction files import directly. Missing strategy
/// defaults to "external".
PredictionRecord record_from_json(const nlohmann::json& j);

/// Writes JSONL sorted by instance_id with sorted object keys.
void write_predictions(std::ostream& out, std::vector<PredictionRecord> records);
void write_predictions(const std::filesystem::path& path, std::vector<PredictionRecord> records);

std::vector<PredictionRecord> read_predictions(std::istream& in);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

}  // namespace zsl
