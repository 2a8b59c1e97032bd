#include "zsl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "zsl/error.hpp"

namespace zsl {

using nlohmann::json;

namespace {

constexpr double kTieTolerance = 1e-12;

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_sorted(const std::vector<double>& v) {
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct Prepared {
  std::string name;
  std::vector<double> samples;  // sorted ascending
  double mean;
  double median;
};

std::vector<double> pool(const std::vector<Prepared>& items, std::size_t lo, std::size_t hi) {
  std::vector<double> out;
  for (std::size_t i = lo; i < hi; ++i) out.insert(out.end(), items[i].samples.begin(), items[i].samples.end());
  return out;
}

class Partitioner {
 public:
  Partitioner(const std::vector<Prepared>& items, const ScottKnottOptions& opt) : items_(items), opt_(opt) {
    prefix_n_.assign(items.size() + 1, 0);
    prefix_sum_.assign(items.size() + 1, 0.0);
    for (std::size_t i = 0; i < items.size(); ++i) {
      prefix_n_[i + 1] = prefix_n_[i] + items[i].samples.size();
      prefix_sum_[i + 1] = prefix_sum_[i] + items[i].mean * static_cast<double>(items[i].samples.size());
    }
  }

  void run(std::size_t lo, std::size_t hi, std::vector<std::pair<std::size_t, std::size_t>>& groups) const {
    if (hi - lo < 2) {
      groups.emplace_back(lo, hi);
      return;
    }
    auto cut = best_cut(lo, hi);
    if (!cut) {
      groups.emplace_back(lo, hi);
      return;
    }
    auto left = pool(items_, lo, *cut);
    auto right = pool(items_, *cut, hi);
    bool significant = opt_.test == SplitTest::effect_size_only || kruskal_wallis_p(left, right) < opt_.alpha;
    if (!significant || cohens_d(left, right) < opt_.effect_threshold) {
      groups.emplace_back(lo, hi);
      return;
    }
    run(lo, *cut, groups);
    run(*cut, hi, groups);
  }

 private:
  double segment_mean(std::size_t lo, std::size_t hi) const {
    return (prefix_sum_[hi] - prefix_sum_[lo]) / static_cast<double>(prefix_n_[hi] - prefix_n_[lo]);
  }

  // Between-group sum of squares over pooled samples: sum of n_g (m_g - m)^2.
  // Never cuts between equal means, so identical treatments stay together.
  std::optional<std::size_t> best_cut(std::size_t lo, std::size_t hi) const {
    const double m = segment_mean(lo, hi);
    std::optional<std::size_t> best;
    double best_ss = -1;
    for (std::size_t cut = lo + 1; cut < hi; ++cut) {
      if (items_[cut - 1].mean == items_[cut].mean) continue;
      double n1 = static_cast<double>(prefix_n_[cut] - prefix_n_[lo]);
      double n2 = static_cast<double>(prefix_n_[hi] - prefix_n_[cut]);
      double d1 = segment_mean(lo, cut) - m;
      double d2 = segment_mean(cut, hi) - m;
      double ss = n1 * d1 * d1 + n2 * d2 * d2;
      if (ss > best_ss * (1 + kTieTolerance) + std::numeric_limits<double>::min()) {
        best = cut;
        best_ss = ss;
      }
    }
    return best;
  }

  const std::vector<Prepared>& items_;
  const ScottKnottOptions& opt_;
  std::vector<std::size_t> prefix_n_;
  std::vector<double> prefix_sum_;
};

}  // namespace

double kruskal_wallis_p(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw StatsError("Kruskal-Wallis needs two nonempty samples");
  struct Obs {
    double v;
    int group;
  };
  std::vector<Obs> all;
  for (double x : a) all.push_back({x, 0});
  for (double x : b) all.push_back({x, 1});
  std::sort(all.begin(), all.end(), [](const Obs& l, const Obs& r) { return l.v < r.v; });

  const double n = static_cast<double>(all.size());
  double rank_sum[2] = {0, 0};
  double tie_term = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].v == all[i].v) ++j;
    double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank_sum[all[k].group] += midrank;
    double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0) return 1.0;
  double h = 12.0 / (n * (n + 1)) *
                 (rank_sum[0] * rank_sum[0] / static_cast<double>(a.size()) +
                  rank_sum[1] * rank_sum[1] / static_cast<double>(b.size())) -
             3.0 * (n + 1);
  h = std::max(0.0, h / correction);
  // Chi-square survival with one degree of freedom.
  return std::erfc(std::sqrt(h / 2.0));
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() + b.size() < 3) throw StatsError("Cohen's d needs at least three observations");
  double ma = mean_of(a), mb = mean_of(b);
  double ssa = 0, ssb = 0;
  for (double x : a) ssa += (x - ma) * (x - ma);
  for (double x : b) ssb += (x - mb) * (x - mb);
  double sd = std::sqrt((ssa + ssb) / static_cast<double>(a.size() + b.size() - 2));
  double diff = std::abs(ma - mb);
  if (sd == 0) return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / sd;
}

std::vector<RankGroup> scott_knott_esd(std::span<const Treatment> treatments, const ScottKnottOptions& options) {
  if (treatments.empty()) throw StatsError("no treatments to rank");
  std::vector<Prepared> items;
  std::set<std::string> names;
  for (const auto& t : treatments) {
    if (t.samples.size() < 2) throw StatsError("treatment '" + t.name + "' has fewer than two samples");
    if (!names.insert(t.name).second) throw StatsError("duplicate treatment '" + t.name + "'");
    for (double x : t.samples)
      if (!std::isfinite(x)) throw StatsError("treatment '" + t.name + "' has a non-finite sample");
    Prepared p{t.name, t.samples, 0, 0};
    // Sorting first keeps the mean independent of sample order.
    std::sort(p.samples.begin(), p.samples.end());
    p.mean = mean_of(p.samples);
    p.median = median_sorted(p.samples);
    items.push_back(std::move(p));
  }
  std::sort(items.begin(), items.end(), [](const Prepared& a, const Prepared& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.name < b.name;
  });

  std::vector<std::pair<std::size_t, std::size_t>> spans;
  Partitioner(items, options).run(0, items.size(), spans);

  std::vector<RankGroup> groups;
  for (const auto& [lo, hi] : spans) {
    RankGroup g;
    g.rank = static_cast<int>(groups.size()) + 1;
    for (std::size_t i = lo; i < hi; ++i) g.members.push_back({items[i].name, items[i].mean, items[i].median});
    g.mean = mean_of(pool(items, lo, hi));
    groups.push_back(std::move(g));
  }
  return groups;
}

double cohens_kappa(std::span<const std::string> rater1, std::span<const std::string> rater2) {
  if (rater1.size() != rater2.size()) throw StatsError("raters labelled different numbers of items");
  if (rater1.empty()) throw StatsError("kappa needs at least one item");
  // Integer form (n*agree - sum m1*m2) / (n^2 - sum m1*m2) avoids rounding in
  // p_o - p_e and makes the result symmetric and rename-invariant exactly.
  const std::uint64_t n = rater1.size();
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> marginals;
  std::uint64_t agree = 0;
  for (std::size_t i = 0; i < rater1.size(); ++i) {
    if (rater1[i] == rater2[i]) ++agree;
    ++marginals[rater1[i]].first;
    ++marginals[rater2[i]].second;
  }
  std::uint64_t chance = 0;
  for (const auto& [cat, m] : marginals) chance += m.first * m.second;
  if (chance == n * n) throw StatsError("kappa is undefined when expected agreement is 1");
  return (static_cast<double>(n * agree) - static_cast<double>(chance)) /
         static_cast<double>(n * n - chance);
}

json to_json(const std::vector<RankGroup>& groups) {
  json out = json::array();
  for (const auto& g : groups) {
    json members = json::array();
    for (const auto& m : g.members) members.push_back(json{{"name", m.name}, {"mean", m.mean}, {"median", m.median}});
    out.push_back(json{{"rank", g.rank}, {"mean", g.mean}, {"members", members}});
  }
  return out;
}

}  // namespace zsl
