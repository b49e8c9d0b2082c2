#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "edulevel/analysis.hpp"
#include "edulevel/prng.hpp"
#include "support/oracle_stats.hpp"
#include "support/synthetic.hpp"

using namespace edulevel;
using namespace edulevel::testing;
using edulevel::testing::oracle::anova_brute_force;

TEST_CASE("f_classif hand example: F = 162") {
  const std::vector<double> x = {1, 2, 10, 11};
  const std::vector<Level> y = {Level::Elementary, Level::Elementary,
                                Level::Middle, Level::Middle};
  const auto r = f_classif(x, y);
  CHECK(r.f == doctest::Approx(162.0).epsilon(1e-12));
  // closed form for df = (1, 2): p = 1 - sqrt(1 - df2/(df2 + df1 F))
  const double p_expected = 1.0 - std::sqrt(1.0 - 2.0 / (2.0 + 162.0));
  CHECK(r.p == doctest::Approx(p_expected).epsilon(1e-9));
}

TEST_CASE("f_classif conventions") {
  const std::vector<Level> y = {Level::Elementary, Level::Elementary,
                                Level::Middle, Level::Middle, Level::High,
                                Level::High};
  SUBCASE("constant column → F = 0, p = 1") {
    const auto r = f_classif({3, 3, 3, 3, 3, 3}, y);
    CHECK(r.f == 0.0);
    CHECK(r.p == 1.0);
    CHECK_FALSE(r.capped);
  }
  SUBCASE("zero within-group variance → capped sentinel, p = 0") {
    const auto r = f_classif({1, 1, 2, 2, 3, 3}, y);
    CHECK(r.f == std::numeric_limits<double>::max());
    CHECK(r.p == 0.0);
    CHECK(r.capped);
  }
  SUBCASE("single-class labels → degenerate error") {
    const std::vector<Level> ones(4, Level::Middle);
    CHECK_THROWS_AS(f_classif({1, 2, 3, 4}, ones), DegenerateInputError);
  }
  SUBCASE("n must exceed the class count") {
    const std::vector<Level> tiny = {Level::Elementary, Level::Middle,
                                     Level::High};
    CHECK_THROWS_AS(f_classif({1, 2, 3}, tiny), DegenerateInputError);
  }
}

TEST_CASE("f_classif is affine invariant") {
  SplitMix64 rng(500);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 9 + static_cast<int>(rng.next_below(40));
    std::vector<double> x(n);
    std::vector<Level> y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.next_gaussian() * 2.0 + 0.5;
      y[i] = static_cast<Level>(i % 3);
    }
    const double a = (rng.next_unit() + 0.1) * (rng.next_below(2) ? 1 : -1);
    const double b = rng.next_gaussian() * 5;
    std::vector<double> mapped(n);
    for (int i = 0; i < n; ++i) mapped[i] = a * x[i] + b;
    const auto r1 = f_classif(x, y);
    const auto r2 = f_classif(mapped, y);
    CHECK(std::fabs(r1.f - r2.f) <=
          1e-9 * std::max(1.0, std::fabs(r1.f)));
  }
}

TEST_CASE("f_classif agrees with brute-force ANOVA on 200 draws") {
  SplitMix64 rng(501);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 7 + static_cast<int>(rng.next_below(60));
    std::vector<double> x(n);
    std::vector<Level> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<Level>(rng.next_below(3));
      x[i] = rng.next_gaussian() + 0.4 * static_cast<int>(y[i]);
    }
    // ensure at least two classes and n > K (regenerate degenerate draws)
    std::set<int> present;
    for (Level lv : y) present.insert(static_cast<int>(lv));
    if (present.size() < 2) continue;
    const auto impl = f_classif(x, y);
    const auto [bf_f, bf_p] = anova_brute_force(x, y);
    CHECK(std::fabs(impl.f - bf_f) <= 1e-9 * std::max(1.0, std::fabs(bf_f)));
    CHECK(std::fabs(impl.p - bf_p) <= 1e-9);
  }
}

TEST_CASE("rank_features orders by F with name tie-break") {
  SplitMix64 rng(321);
  DesignMatrix m;
  m.feature_names = {"label_copy", "noise", "dup_b", "dup_a"};
  for (int i = 0; i < 60; ++i) {
    const auto lv = static_cast<Level>(i % 3);
    const double noise = rng.next_gaussian();
    m.labels.push_back(lv);
    m.rows.push_back({static_cast<double>(static_cast<int>(lv)), noise,
                      42.0, 42.0});
  }
  const FRanking ranking = rank_features(m);
  REQUIRE(ranking.ranked.size() == 4);
  CHECK(ranking.ranked[0].name == "label_copy");
  CHECK(ranking.ranked[0].f_capped);  // label copy has zero within-group var
  CHECK(ranking.ranked[0].p == 0.0);
  // identical constant columns tie at F = 0, broken by name
  CHECK(ranking.ranked[2].name == "dup_a");
  CHECK(ranking.ranked[3].name == "dup_b");
  CHECK(ranking.ranked[2].f == ranking.ranked[3].f);

  // ranked names are a permutation of the inputs
  std::multiset<std::string> in(m.feature_names.begin(), m.feature_names.end());
  std::multiset<std::string> out;
  for (const auto& s : ranking.ranked) out.insert(s.name);
  CHECK(in == out);

  CHECK(select_k_best(ranking, 4).size() == 4);
  CHECK(select_k_best(ranking, 2) ==
        std::vector<std::string>({"label_copy", "noise"}));
}

TEST_CASE("bootstrap: identical feature sets report no difference") {
  const DesignMatrix train_m = gaussian_blobs(20, 3, 61);
  const DesignMatrix test_m = gaussian_blobs(10, 3, 62);
  const std::vector<std::string> names = train_m.feature_names;
  Hyperparams hp;
  hp.max_iters = 60;
  const BootstrapResult r =
      bootstrap_compare(train_m, test_m, names, names, 10, 99, hp);
  CHECK(r.mean_diff == 0.0);
  CHECK(r.identical);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("bootstrap is deterministic for a fixed seed") {
  const DesignMatrix train_m = gaussian_blobs(20, 4, 71);
  const DesignMatrix test_m = gaussian_blobs(10, 4, 72);
  Hyperparams hp;
  hp.max_iters = 60;
  const std::vector<std::string> combo = train_m.feature_names;
  const std::vector<std::string> partial = {"x0", "x1"};
  const BootstrapResult a =
      bootstrap_compare(train_m, test_m, combo, partial, 12, 7, hp);
  const BootstrapResult b =
      bootstrap_compare(train_m, test_m, combo, partial, 12, 7, hp);
  CHECK(bootstrap_to_json(a).dump() == bootstrap_to_json(b).dump());
  const BootstrapResult c =
      bootstrap_compare(train_m, test_m, combo, partial, 12, 8, hp);
  CHECK(bootstrap_to_json(a).dump() != bootstrap_to_json(c).dump());
}

TEST_CASE("bootstrap detects a constructed separation") {
  // first feature set contains a perfectly predictive column, second is noise
  SplitMix64 rng(83);
  auto build = [&rng](int n, std::uint64_t seed) {
    DesignMatrix m;
    m.feature_names = {"label_copy", "noise_a", "noise_b"};
    SplitMix64 local(seed);
    for (int i = 0; i < n; ++i) {
      const auto lv = static_cast<Level>(i % 3);
      m.labels.push_back(lv);
      m.rows.push_back({static_cast<double>(static_cast<int>(lv)),
                        local.next_gaussian(), local.next_gaussian()});
      m.doc_ids.push_back("d" + std::to_string(i));
    }
    return m;
  };
  const DesignMatrix train_m = build(60, 1);
  const DesignMatrix test_m = build(30, 2);
  Hyperparams hp;
  hp.max_iters = 80;
  const std::vector<std::string> informative = {"label_copy", "noise_a"};
  const std::vector<std::string> noise_only = {"noise_a", "noise_b"};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BootstrapResult r = bootstrap_compare(train_m, test_m, informative,
                                                noise_only, 25, seed, hp);
    CHECK(r.mean_diff > 0.0);
    CHECK(r.p_value < 0.05);
  }
}

TEST_CASE("bootstrap unpaired mode draws independent resamples") {
  const DesignMatrix train_m = gaussian_blobs(15, 3, 311);
  const DesignMatrix test_m = gaussian_blobs(8, 3, 312);
  Hyperparams hp;
  hp.max_iters = 50;
  const std::vector<std::string> cols = train_m.feature_names;
  // identical feature sets: paired mode ties exactly, unpaired mode runs a
  // real two-sample test whose arms differ by resampling noise
  const BootstrapResult tied =
      bootstrap_compare(train_m, test_m, cols, cols, 10, 5, hp, false, true);
  CHECK(tied.identical);
  CHECK(tied.p_value == 1.0);
  const BootstrapResult unpaired =
      bootstrap_compare(train_m, test_m, cols, cols, 10, 5, hp, false, false);
  CHECK_FALSE(unpaired.paired);
  CHECK(unpaired.p_value > 0.0);
  bool arms_differ = false;
  for (const auto& [a, b] : unpaired.accuracies)
    if (a != b) arms_differ = true;
  CHECK(arms_differ);
  // deterministic too
  const BootstrapResult again =
      bootstrap_compare(train_m, test_m, cols, cols, 10, 5, hp, false, false);
  CHECK(bootstrap_to_json(unpaired).dump() == bootstrap_to_json(again).dump());
}

TEST_CASE("bootstrap resample-test mode runs and differs") {
  const DesignMatrix train_m = gaussian_blobs(20, 3, 91);
  const DesignMatrix test_m = gaussian_blobs(12, 3, 92);
  Hyperparams hp;
  hp.max_iters = 50;
  const std::vector<std::string> combo = train_m.feature_names;
  const std::vector<std::string> partial = {"x0"};
  const BootstrapResult fixed =
      bootstrap_compare(train_m, test_m, combo, partial, 8, 5, hp, false);
  const BootstrapResult resampled =
      bootstrap_compare(train_m, test_m, combo, partial, 8, 5, hp, true);
  CHECK_FALSE(fixed.resampled_test);
  CHECK(resampled.resampled_test);
  CHECK(bootstrap_to_json(fixed).dump() != bootstrap_to_json(resampled).dump());
}

TEST_CASE("ranking renders csv and table") {
  DesignMatrix m;
  m.feature_names = {"pm_01", "gunning_fog"};
  SplitMix64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const auto lv = static_cast<Level>(i % 3);
    m.labels.push_back(lv);
    m.rows.push_back(
        {static_cast<int>(lv) == 0 ? 1.0 : 0.0,
         static_cast<double>(static_cast<int>(lv)) + rng.next_gaussian()});
  }
  const FRanking ranking = rank_features(m);
  const std::string csv = ranking_to_csv(ranking);
  CHECK(csv.find("rank,feature,F,p") == 0);
  CHECK(csv.find("pm_01") != std::string::npos);
  const std::string table = render_ranking_table(ranking);
  CHECK(table.find("Prompt metrics") != std::string::npos);
  CHECK(table.find("Static metrics") != std::string::npos);
  CHECK(table.find("gunning_fog") != std::string::npos);
}
