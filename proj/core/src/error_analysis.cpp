#include "zsl/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>

#include "zsl/csv.hpp"
#include "zsl/error.hpp"

namespace zsl {

MisclassificationSet misclassifications(const std::string& run_key, const std::string& scope, const Dataset& ds,
                                        const std::vector<std::size_t>& evaluated,
                                        const std::vector<PredictionRecord>& records) {
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : records) by_id[r.instance_id] = &r;
  MisclassificationSet out{run_key, ds.profile.name, scope, {}};
  for (auto i : evaluated) {
    const auto& inst = ds.instances.at(i);
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) throw DataError(run_key + ": no prediction for instance '" + inst.id + "'");
    const auto& r = *it->second;
    if (r.failed() || !r.predicted || *r.predicted != inst.gold) out.ids.insert(inst.id);
  }
  return out;
}

std::set<std::string> intersect_misclassifications(std::span<const MisclassificationSet> sets) {
  if (sets.empty()) throw PreconditionError("nothing to intersect");
  for (const auto& s : sets) {
    if (s.dataset != sets.front().dataset || s.scope != sets.front().scope)
      throw PreconditionError("cannot intersect runs from different datasets or splits ('" + sets.front().run_key +
                              "' vs '" + s.run_key + "')");
  }
  std::set<std::string> common = sets.front().ids;
  for (std::size_t k = 1; k < sets.size(); ++k) {
    std::set<std::string> next;
    std::set_intersection(common.begin(), common.end(), sets[k].ids.begin(), sets[k].ids.end(),
                          std::inserter(next, next.end()));
    common = std::move(next);
  }
  return common;
}

void export_error_candidates(std::ostream& out, const std::set<std::string>& common, const Dataset& ds,
                             std::span<const NamedPredictions> runs) {
  if (common.empty()) throw PreconditionError("no common misclassifications to export");
  std::map<std::string, const Instance*> instances;
  for (const auto& inst : ds.instances) instances[inst.id] = &inst;
  std::vector<std::map<std::string, std::string>> predicted(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k)
    for (const auto& r : runs[k].records) predicted[k][r.instance_id] = r.predicted.value_or("UNMAPPED");

  std::vector<std::string> header{"id", "text", "gold"};
  for (const auto& run : runs) header.push_back(run.run_key);
  header.emplace_back("category");
  csv::write_row(out, header);
  for (const auto& id : common) {
    auto it = instances.find(id);
    if (it == instances.end()) throw DataError("unknown instance id '" + id + "'");
    std::vector<std::string> row{id, it->second->text, it->second->gold};
    for (const auto& p : predicted) {
      auto hit = p.find(id);
      row.push_back(hit == p.end() ? "" : hit->second);
    }
    row.emplace_back();
    csv::write_row(out, row);
  }
}

CategoryTally import_error_annotations(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto rows = csv::parse(text);
  if (rows.empty()) throw DataError("empty worksheet");
  const auto& header = rows.front();
  auto col = [&](const char* name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(std::string("worksheet has no '") + name + "' column", 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = col("id");
  const auto cat_col = col("category");

  CategoryTally t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError("expected " + std::to_string(header.size()) + " fields", r + 1);
    auto category = row[cat_col];
    category.erase(0, category.find_first_not_of(" \t"));
    category.erase(category.find_last_not_of(" \t") + 1);
    if (category.empty()) {
      ++t.unannotated;
      continue;
    }
    if (row[id_col].empty()) throw DataError("row without id", r + 1);
    ++t.counts[category];
    ++t.annotated;
  }
  if (t.unannotated > 0)
    t.warnings.push_back(std::to_string(t.unannotated) + " row(s) have no category and were not tallied");
  if (t.annotated == 0) return t;

  double rounded_sum = 0;
  for (const auto& [cat, n] : t.counts) {
    double pct = 100.0 * static_cast<double>(n) / static_cast<double>(t.annotated);
    t.percentages[cat] = pct;
    rounded_sum += std::round(pct * 100.0) / 100.0;
  }
  // Each two-decimal rounding moves a share by at most 0.005.
  t.closed = std::abs(rounded_sum - 100.0) <= 0.005 * static_cast<double>(t.counts.size()) + 1e-9;
  if (!t.closed) t.warnings.push_back("category percentages do not sum to 100");
  return t;
}

}  // namespace zsl
