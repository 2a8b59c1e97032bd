#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsl/types.hpp"

namespace zsl {

/// Trims and ASCII-lowercases a class or emotion token.
std::string canonical_token(std::string_view token);

DatasetProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DatasetProfile& profile);
DatasetProfile load_profile(const std::filesystem::path& path);

/// Loads a JSONL (`.jsonl`) or CSV (`.csv`) dataset. JSONL rows carrying an
/// "emotion" field instead of "gold" are routed through map_emotions.
Dataset load_dataset(const std::filesystem::path& path, const DatasetProfile& profile);

/// Parses dataset bytes directly; `format` is "jsonl" or "csv".
Dataset parse_dataset(std::string_view bytes, std::string_view format, const DatasetProfile& profile);

struct EmotionRow {
  std::string id;
  std::string text;
  std::string emotion;
};

/// Keeps rows whose emotion maps to a polarity; the rest are counted in
/// Dataset::dropped.
Dataset map_emotions(std::span<const EmotionRow> raw, const DatasetProfile& profile);

struct SplitRatios {
  unsigned train = 8;
  unsigned validation = 1;
  unsigned test = 1;
};

struct SplitAssignment {
  // Each list is sorted by id.
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

nlohmann::json split_to_json(const SplitAssignment& split);
SplitAssignment split_from_json(const nlohmann::json& j);

/// Per-class largest-remainder allocation over a seeded shuffle. Remainder
/// ties go to test, then validation, then train. Every split receives at
/// least one instance of every class.
SplitAssignment stratified_split(const Dataset& dataset, std::uint64_t seed, SplitRatios ratios = {});

/// Sizes (train, validation, test) the allocation assigns to a class of `n`.
std::array<std::size_t, 3> allocate_class(std::size_t n, SplitRatios ratios);

/// Deterministic, platform-independent Fisher-Yates shuffle.
void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

}  // namespace zsl
