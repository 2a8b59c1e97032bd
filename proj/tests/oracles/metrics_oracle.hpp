#pragma once
// Brute-force F1: walks every instance for every class and uses the textbook
// precision/recall definitions. Shares no code with zsl::metrics.
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct F1Pair {
  double macro = 0;
  double micro = 0;
};

inline double f1_pr(double tp, double fp, double fn) {
  double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline F1Pair f1_scores(const std::vector<std::string>& gold, const std::vector<std::optional<std::string>>& pred,
                        const std::vector<std::string>& classes) {
  F1Pair out;
  double TP = 0, FP = 0, FN = 0;
  for (const auto& c : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      bool is_gold = gold[i] == c;
      bool is_pred = pred[i].has_value() && *pred[i] == c;
      if (is_gold && is_pred) tp += 1;
      if (!is_gold && is_pred) fp += 1;
      if (is_gold && !is_pred) fn += 1;
    }
    out.macro += f1_pr(tp, fp, fn);
    TP += tp;
    FP += fp;
    FN += fn;
  }
  out.macro /= static_cast<double>(classes.size());
  out.micro = f1_pr(TP, FP, FN);
  return out;
}

}  // namespace oracle
