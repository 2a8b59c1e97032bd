#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace zsl {

struct Treatment {
  std::string name;
  std::vector<double> samples;
};

struct RankedTreatment {
  std::string name;
  double mean = 0;
  double median = 0;
};

struct RankGroup {
  int rank = 0;  // 1 = best
  // Members in descending-mean order.
  std::vector<RankedTreatment> members;
  double mean = 0;  // pooled over all member samples
};

enum class SplitTest {
  kruskal_wallis,  // rank-based significance check on each candidate split
  effect_size_only,
};

struct ScottKnottOptions {
  double effect_threshold = 0.2;
  double alpha = 0.05;
  SplitTest test = SplitTest::kruskal_wallis;
};

/// Recursively bipartitions mean-sorted treatments at the contiguous cut that
/// maximizes between-group sum of squares. A cut is kept only when it is
/// significant at `alpha` and the groups' Cohen's d reaches
/// `effect_threshold`. Near-equal sums of squares (relative 1e-12) resolve to
/// the earliest cut.
std::vector<RankGroup> scott_knott_esd(std::span<const Treatment> treatments, const ScottKnottOptions& options = {});

/// Kruskal-Wallis H (tie-corrected) for two samples and its chi-square(1)
/// p-value. Returns p = 1 when every value is tied.
double kruskal_wallis_p(std::span<const double> a, std::span<const double> b);

/// |mean(a) - mean(b)| / pooled SD. Zero spread gives 0 for equal means and
/// +infinity otherwise.
double cohens_d(std::span<const double> a, std::span<const double> b);

/// Chance-corrected agreement. Throws StatsError when expected agreement is 1.
double cohens_kappa(std::span<const std::string> rater1, std::span<const std::string> rater2);

nlohmann::json to_json(const std::vector<RankGroup>& groups);

}  // namespace zsl
