#include "zsl/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "zsl/error.hpp"

namespace zsl {

using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t index_of(const std::vector<ClassId>& classes, const ClassId& c, const char* role) {
  auto it = std::find(classes.begin(), classes.end(), c);
  if (it == classes.end()) throw DataError(std::string("unknown ") + role + " class '" + c + "'");
  return static_cast<std::size_t>(it - classes.begin());
}

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw PreconditionError("no scored instances");
}

struct Counts {
  std::size_t tp, fp, fn, support, predicted;
};

Counts class_counts(const ConfusionMatrix& cm, std::size_t k) {
  Counts c{cm.cells[k][k], 0, 0, 0, 0};
  for (std::size_t j = 0; j < cm.classes.size(); ++j) {
    c.support += cm.cells[k][j];
    c.predicted += cm.cells[j][k];
  }
  c.support += cm.unmapped[k];
  c.fp = c.predicted - c.tp;
  c.fn = c.support - c.tp;
  return c;
}

// 2TP / (2TP + FP + FN): the harmonic mean of precision and recall.
double f1_from(std::size_t tp, std::size_t fp, std::size_t fn) { return ratio(2 * tp, 2 * tp + fp + fn); }

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t n = total_unmapped();
  for (const auto& row : cells) n = std::accumulate(row.begin(), row.end(), n);
  return n;
}

std::size_t ConfusionMatrix::total_unmapped() const { return std::accumulate(unmapped.begin(), unmapped.end(), std::size_t{0}); }

ConfusionMatrix confusion(std::span<const ClassId> gold, std::span<const std::optional<ClassId>> pred,
                          const std::vector<ClassId>& classes) {
  if (gold.size() != pred.size())
    throw PreconditionError("gold/prediction length mismatch: " + std::to_string(gold.size()) + " vs " +
                            std::to_string(pred.size()));
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.cells.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  cm.unmapped.assign(classes.size(), 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = index_of(classes, gold[i], "gold");
    if (!pred[i]) {
      ++cm.unmapped[g];
    } else {
      ++cm.cells[g][index_of(classes, *pred[i], "predicted")];
    }
  }
  return cm;
}

double macro_f1(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  double sum = 0;
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    auto c = class_counts(cm, k);
    sum += f1_from(c.tp, c.fp, c.fn);
  }
  return sum / static_cast<double>(cm.classes.size());
}

double micro_f1(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    auto c = class_counts(cm, k);
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  return f1_from(tp, fp, fn);
}

EvaluationResult evaluate(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  EvaluationResult r;
  r.classes = cm.classes;
  r.total = cm.total();
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    auto c = class_counts(cm, k);
    ClassScores s;
    s.precision = ratio(c.tp, c.predicted);
    s.recall = ratio(c.tp, c.support);
    s.f1 = f1_from(c.tp, c.fp, c.fn);
    s.support = c.support;
    s.predicted = c.predicted;
    s.degenerate = c.support == 0 && c.predicted == 0;
    if (s.degenerate) r.degenerate_classes.push_back(cm.classes[k]);
    r.per_class[cm.classes[k]] = s;
  }
  r.macro_f1 = macro_f1(cm);
  r.micro_f1 = micro_f1(cm);
  r.unmapped_rate = ratio(cm.total_unmapped(), r.total);
  return r;
}

json to_json(const EvaluationResult& r) {
  json per_class = json::object();
  for (const auto& [cls, s] : r.per_class) {
    per_class[cls] = json{{"precision", s.precision}, {"recall", s.recall},   {"f1", s.f1},
                          {"support", s.support},     {"predicted", s.predicted}, {"degenerate", s.degenerate}};
  }
  return json{{"classes", r.classes},   {"per_class", per_class},         {"macro_f1", r.macro_f1},
              {"micro_f1", r.micro_f1}, {"unmapped_rate", r.unmapped_rate}, {"total", r.total},
              {"degenerate_classes", r.degenerate_classes}};
}

json to_json(const ConfusionMatrix& cm) {
  return json{{"classes", cm.classes}, {"cells", cm.cells}, {"unmapped", cm.unmapped}};
}

}  // namespace zsl
