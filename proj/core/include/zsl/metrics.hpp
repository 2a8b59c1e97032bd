#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsl/types.hpp"

namespace zsl {

struct ConfusionMatrix {
  std::vector<ClassId> classes;
  // cells[gold][pred], indexed by position in `classes`.
  std::vector<std::vector<std::size_t>> cells;
  // Unmapped predictions per gold class.
  std::vector<std::size_t> unmapped;

  std::size_t total() const;
  std::size_t total_unmapped() const;
};

/// Unmapped predictions are tallied apart from every class: they are misses
/// for their gold class and false positives for none.
ConfusionMatrix confusion(std::span<const ClassId> gold, std::span<const std::optional<ClassId>> pred,
                          const std::vector<ClassId>& classes);

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
  std::size_t predicted = 0;
  // No gold instances and no predictions: F1 is taken as 0.
  bool degenerate = false;
};

struct EvaluationResult {
  std::vector<ClassId> classes;
  std::map<ClassId, ClassScores> per_class;
  double macro_f1 = 0;
  double micro_f1 = 0;
  double unmapped_rate = 0;
  std::size_t total = 0;
  std::vector<ClassId> degenerate_classes;
};

/// Unweighted mean of per-class F1. Zero denominators count as 0.
double macro_f1(const ConfusionMatrix& cm);
/// F1 over pooled counts; equals accuracy when nothing is Unmapped.
double micro_f1(const ConfusionMatrix& cm);

EvaluationResult evaluate(const ConfusionMatrix& cm);

nlohmann::json to_json(const EvaluationResult& r);
nlohmann::json to_json(const ConfusionMatrix& cm);

}  // namespace zsl
