#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "zsl/classify.hpp"
#include "zsl/types.hpp"

namespace zsl {

struct MisclassificationSet {
  std::string run_key;
  std::string dataset;
  std::string scope;  // "full" or "test"
  std::set<std::string> ids;
};

/// Instances in `evaluated` whose prediction differs from gold. Unmapped and
/// failed predictions count as misclassified.
MisclassificationSet misclassifications(const std::string& run_key, const std::string& scope, const Dataset& ds,
                                        const std::vector<std::size_t>& evaluated,
                                        const std::vector<PredictionRecord>& records);

/// Exact intersection; every set must come from the same dataset and scope.
std::set<std::string> intersect_misclassifications(std::span<const MisclassificationSet> sets);

struct NamedPredictions {
  std::string run_key;
  std::vector<PredictionRecord> records;
};

/// Annotation worksheet: id,text,gold,<one column per run>,category with an
/// empty category column.
void export_error_candidates(std::ostream& out, const std::set<std::string>& common, const Dataset& ds,
                             std::span<const NamedPredictions> runs);

struct CategoryTally {
  std::map<std::string, std::size_t> counts;
  std::map<std::string, double> percentages;  // of annotated rows
  std::size_t annotated = 0;
  std::size_t unannotated = 0;
  // Two-decimal percentages add up to 100 within rounding.
  bool closed = false;
  std::vector<std::string> warnings;
};

/// Reads a filled-in worksheet (needs "id" and "category" columns).
CategoryTally import_error_annotations(std::istream& in);

}  // namespace zsl
