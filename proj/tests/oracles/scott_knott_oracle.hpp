#pragma once
// Exhaustive Scott-Knott reference: every contiguous bipartition is scored
// from scratch (no prefix sums), split tests are naive O(n^2) rank counts.
// Cuts between equal means are skipped.
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

struct SkTreatment {
  std::string name;
  std::vector<double> samples;
};

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::vector<double> concat(const std::vector<SkTreatment>& ts, std::size_t lo, std::size_t hi) {
  std::vector<double> out;
  for (std::size_t i = lo; i < hi; ++i) out.insert(out.end(), ts[i].samples.begin(), ts[i].samples.end());
  return out;
}

inline double kw_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const double n = static_cast<double>(all.size());
  auto rank = [&](double x) {
    double less = 0, equal = 0;
    for (double y : all) {
      if (y < x) less += 1;
      if (y == x) equal += 1;
    }
    return less + (equal + 1) / 2.0;
  };
  double ra = 0, rb = 0;
  for (double x : a) ra += rank(x);
  for (double x : b) rb += rank(x);
  double h = 12.0 / (n * (n + 1)) * (ra * ra / static_cast<double>(a.size()) + rb * rb / static_cast<double>(b.size())) - 3 * (n + 1);
  double ties = 0;
  std::vector<double> seen;
  for (double x : all) {
    if (std::find(seen.begin(), seen.end(), x) != seen.end()) continue;
    seen.push_back(x);
    double t = static_cast<double>(std::count(all.begin(), all.end(), x));
    ties += t * t * t - t;
  }
  double c = 1 - ties / (n * n * n - n);
  if (c <= 0) return 1.0;
  h = std::max(0.0, h / c);
  return std::erfc(std::sqrt(h / 2));
}

inline double cohen_d(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = mean(a), mb = mean(b), ss = 0;
  for (double x : a) ss += (x - ma) * (x - ma);
  for (double x : b) ss += (x - mb) * (x - mb);
  double sd = std::sqrt(ss / static_cast<double>(a.size() + b.size() - 2));
  double diff = std::fabs(ma - mb);
  if (sd == 0) return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / sd;
}

inline void sk_recurse(const std::vector<SkTreatment>& ts, std::size_t lo, std::size_t hi, double alpha,
                       double threshold, std::vector<std::vector<std::string>>& groups) {
  auto emit = [&] {
    std::vector<std::string> g;
    for (std::size_t i = lo; i < hi; ++i) g.push_back(ts[i].name);
    groups.push_back(g);
  };
  if (hi - lo < 2) return emit();
  auto all = concat(ts, lo, hi);
  double m = mean(all);
  std::size_t best = 0;
  double best_ss = -1;
  for (std::size_t cut = lo + 1; cut < hi; ++cut) {
    if (mean(ts[cut - 1].samples) == mean(ts[cut].samples)) continue;
    auto l = concat(ts, lo, cut), r = concat(ts, cut, hi);
    double ss = static_cast<double>(l.size()) * std::pow(mean(l) - m, 2) +
                static_cast<double>(r.size()) * std::pow(mean(r) - m, 2);
    if (best == 0 || ss > best_ss * (1 + 1e-9)) {
      best = cut;
      best_ss = ss;
    }
  }
  if (best == 0) return emit();
  auto l = concat(ts, lo, best), r = concat(ts, best, hi);
  if (kw_p(l, r) >= alpha || cohen_d(l, r) < threshold) return emit();
  sk_recurse(ts, lo, best, alpha, threshold, groups);
  sk_recurse(ts, best, hi, alpha, threshold, groups);
}

/// Groups in rank order, members by descending mean (ties by name).
inline std::vector<std::vector<std::string>> scott_knott(std::vector<SkTreatment> ts, double alpha = 0.05,
                                                         double threshold = 0.2) {
  for (auto& t : ts) std::sort(t.samples.begin(), t.samples.end());
  std::sort(ts.begin(), ts.end(), [](const SkTreatment& a, const SkTreatment& b) {
    double ma = mean(a.samples), mb = mean(b.samples);
    return ma != mb ? ma > mb : a.name < b.name;
  });
  std::vector<std::vector<std::string>> groups;
  sk_recurse(ts, 0, ts.size(), alpha, threshold, groups);
  return groups;
}

}  // namespace oracle
