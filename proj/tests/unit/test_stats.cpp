#include <doctest.h>
#include <zsl/error.hpp>
#include <zsl/stats.hpp>

#include <random>

#include "../oracles/kappa_oracle.hpp"
#include "../oracles/scott_knott_oracle.hpp"

namespace {

std::vector<std::vector<std::string>> names(const std::vector<zsl::RankGroup>& groups) {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : groups) {
    out.emplace_back();
    for (const auto& m : g.members) out.back().push_back(m.name);
  }
  return out;
}

}  // namespace

TEST_SUITE("scott-knott") {
  TEST_CASE("single treatment is rank 1") {
    std::vector<zsl::Treatment> t{{"A", {0.5, 0.6}}};
    auto g = zsl::scott_knott_esd(t);
    REQUIRE(g.size() == 1);
    CHECK(g[0].rank == 1);
  }

  TEST_CASE("identical multisets share a group") {
    std::vector<zsl::Treatment> t{{"A", {0.5, 0.6, 0.7}}, {"B", {0.7, 0.5, 0.6}}};
    CHECK(zsl::scott_knott_esd(t).size() == 1);
  }

  TEST_CASE("well separated pair splits, high group first") {
    std::vector<zsl::Treatment> t{{"B", {0.10, 0.11, 0.09}}, {"A", {0.90, 0.91, 0.89}}};
    auto g = zsl::scott_knott_esd(t);
    REQUIRE(g.size() == 2);
    CHECK(g[0].members[0].name == "A");
    CHECK(g[0].rank == 1);
    CHECK(g[1].rank == 2);
    CHECK(g[0].mean == doctest::Approx(0.9));
  }

  TEST_CASE("negligible effect merges even when the test is significant") {
    std::vector<zsl::Treatment> t{{"A", {}}, {"B", {}}};
    for (int i = 0; i < 200; ++i) {
      t[0].samples.push_back(i);
      t[1].samples.push_back(i + 10);
    }
    zsl::ScottKnottOptions opt;
    opt.test = zsl::SplitTest::effect_size_only;
    CHECK(zsl::scott_knott_esd(t, opt).size() == 1);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(zsl::scott_knott_esd({}), zsl::StatsError);
    std::vector<zsl::Treatment> one{{"A", {0.5}}};
    CHECK_THROWS_AS(zsl::scott_knott_esd(one), zsl::StatsError);
    std::vector<zsl::Treatment> dup{{"A", {0.5, 0.6}}, {"A", {0.1, 0.2}}};
    CHECK_THROWS_AS(zsl::scott_knott_esd(dup), zsl::StatsError);
    std::vector<zsl::Treatment> nan{{"A", {0.5, NAN}}};
    CHECK_THROWS_AS(zsl::scott_knott_esd(nan), zsl::StatsError);
  }

  TEST_CASE("result does not depend on input or sample order") {
    std::vector<zsl::Treatment> t{{"A", {0.3, 0.2, 0.25}}, {"B", {0.8, 0.85, 0.9}}, {"C", {0.5, 0.55, 0.45}}};
    auto base = names(zsl::scott_knott_esd(t));
    std::reverse(t.begin(), t.end());
    for (auto& x : t) std::reverse(x.samples.begin(), x.samples.end());
    CHECK(names(zsl::scott_knott_esd(t)) == base);
  }

  TEST_CASE("random problems match the exhaustive oracle") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t k = 1 + rng() % 6, n = 2 + rng() % 9;
      std::vector<zsl::Treatment> t;
      std::vector<oracle::SkTreatment> o;
      for (std::size_t i = 0; i < k; ++i) {
        double centre = u(rng), spread = 0.01 + 0.2 * u(rng);
        std::vector<double> s(n);
        for (auto& x : s) x = centre + spread * (u(rng) - 0.5);
        t.push_back({"t" + std::to_string(i), s});
        o.push_back({"t" + std::to_string(i), s});
      }
      CHECK(names(zsl::scott_knott_esd(t)) == oracle::scott_knott(o));
    }
  }

  TEST_CASE("Kruskal-Wallis and Cohen's d") {
    std::vector<double> a{0.90, 0.91, 0.89}, b{0.10, 0.11, 0.09};
    CHECK(zsl::kruskal_wallis_p(a, b) == doctest::Approx(0.0495).epsilon(0.001));
    CHECK(zsl::kruskal_wallis_p(a, a) == doctest::Approx(1.0));
    CHECK(zsl::cohens_d(a, b) > 0.2);
    std::vector<double> c{1, 1}, d{1, 1};
    CHECK(zsl::cohens_d(c, d) == 0.0);
    CHECK(zsl::kruskal_wallis_p(c, d) == 1.0);
  }
}

TEST_SUITE("kappa") {
  TEST_CASE("identical ratings give 1") {
    std::vector<std::string> r{"a", "b", "a", "c"};
    CHECK(zsl::cohens_kappa(r, r) == 1.0);
  }

  TEST_CASE("worked example gives exactly 0.6") {
    std::vector<std::string> r1{"A", "A", "A", "A", "A", "B", "B", "B", "B", "B"};
    std::vector<std::string> r2{"A", "A", "A", "A", "B", "B", "B", "B", "B", "A"};
    CHECK(zsl::cohens_kappa(r1, r2) == 0.6);
  }

  TEST_CASE("agrees with the textbook formula; symmetric") {
    std::mt19937_64 rng(8);
    const char* cats[] = {"x", "y", "z"};
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t n = 5 + rng() % 100;
      std::vector<std::string> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = cats[rng() % 3];
        b[i] = rng() % 2 ? a[i] : cats[rng() % 3];
      }
      bool degenerate = std::all_of(a.begin(), a.end(), [&](auto& s) { return s == a[0]; }) &&
                        std::all_of(b.begin(), b.end(), [&](auto& s) { return s == a[0]; });
      if (degenerate) continue;
      CHECK(zsl::cohens_kappa(a, b) == doctest::Approx(oracle::kappa(a, b)).epsilon(1e-12));
      CHECK(zsl::cohens_kappa(a, b) == zsl::cohens_kappa(b, a));
    }
  }

  TEST_CASE("errors") {
    std::vector<std::string> a{"x", "x"}, b{"x"};
    CHECK_THROWS_AS(zsl::cohens_kappa(a, b), zsl::StatsError);
    CHECK_THROWS_AS(zsl::cohens_kappa(a, a), zsl::StatsError);
    CHECK_THROWS_AS(zsl::cohens_kappa({}, {}), zsl::StatsError);
  }
}
