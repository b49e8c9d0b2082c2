#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "edulevel/classifier.hpp"
#include "edulevel/prng.hpp"
#include "edulevel/stats.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

struct FScore {
  std::string name;
  double f = 0.0;
  double p = 1.0;
  bool f_capped = false;  // zero within-group variance, nonzero between
};

struct FRanking {
  std::vector<FScore> ranked;  // descending F, ties by name
};

struct FClassifResult {
  double f = 0.0;
  double p = 1.0;
  bool capped = false;
};

/// One-way ANOVA of a single column against the class labels. Conventions:
/// constant column → F = 0, p = 1; zero within-group variance with nonzero
/// between-group variance → F capped at the largest finite double, p = 0.
inline FClassifResult f_classif(const std::vector<double>& column,
                                const std::vector<Level>& labels) {
  if (column.size() != labels.size())
    throw ShapeError("f_classif: column/labels length mismatch");
  const int n = static_cast<int>(column.size());

  std::array<int, kNumClasses> counts{};
  std::array<double, kNumClasses> sums{};
  for (int i = 0; i < n; ++i) {
    ++counts[static_cast<int>(labels[i])];
    sums[static_cast<int>(labels[i])] += column[i];
  }
  int k_present = 0;
  for (int k = 0; k < kNumClasses; ++k)
    if (counts[k] > 0) ++k_present;
  if (k_present < 2)
    throw DegenerateInputError("f_classif needs at least 2 classes");
  if (n <= k_present)
    throw DegenerateInputError("f_classif needs n > number of classes");

  double grand_mean = 0.0;
  for (double x : column) grand_mean += x;
  grand_mean /= n;

  std::array<double, kNumClasses> means{};
  for (int k = 0; k < kNumClasses; ++k)
    means[k] = counts[k] > 0 ? sums[k] / counts[k] : 0.0;

  double ss_between = 0.0, ss_within = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    if (counts[k] == 0) continue;
    ss_between += counts[k] * (means[k] - grand_mean) * (means[k] - grand_mean);
  }
  for (int i = 0; i < n; ++i) {
    const double d = column[i] - means[static_cast<int>(labels[i])];
    ss_within += d * d;
  }

  const double df1 = k_present - 1;
  const double df2 = n - k_present;
  FClassifResult r;
  if (ss_between <= 0.0) {  // constant column (or no between-group signal)
    r.f = 0.0;
    r.p = 1.0;
    return r;
  }
  if (ss_within <= 0.0) {
    r.f = std::numeric_limits<double>::max();
    r.p = 0.0;
    r.capped = true;
    return r;
  }
  r.f = (ss_between / df1) / (ss_within / df2);
  r.p = stats::f_sf(r.f, df1, df2);
  return r;
}

/// F per column, sorted descending; ties broken by feature name.
inline FRanking rank_features(const DesignMatrix& matrix) {
  FRanking ranking;
  ranking.ranked.reserve(matrix.cols());
  for (int j = 0; j < matrix.cols(); ++j) {
    const auto res = f_classif(matrix.column(j), matrix.labels);
    ranking.ranked.push_back(
        {matrix.feature_names[j], res.f, res.p, res.capped});
  }
  std::sort(ranking.ranked.begin(), ranking.ranked.end(),
            [](const FScore& a, const FScore& b) {
              if (a.f != b.f) return a.f > b.f;
              return a.name < b.name;
            });
  return ranking;
}

/// SelectKBest semantics: names of the k highest-F features.
inline std::vector<std::string> select_k_best(const FRanking& ranking, int k) {
  std::vector<std::string> out;
  const int limit = std::min<int>(k, static_cast<int>(ranking.ranked.size()));
  out.reserve(limit);
  for (int i = 0; i < limit; ++i) out.push_back(ranking.ranked[i].name);
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrap comparison of two feature sets
// ---------------------------------------------------------------------------

struct BootstrapResult {
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> accuracies;  // (first set, second set)
  double mean_diff = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool identical = false;  // zero variance and zero mean; "no difference"
  bool resampled_test = false;
  bool paired = true;
};

namespace detail {

inline std::vector<int> bootstrap_indices(int n, SplitMix64& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i)
    idx[i] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
  return idx;
}

inline bool covers_all_classes(const std::vector<int>& idx,
                               const std::vector<Level>& labels) {
  std::array<bool, kNumClasses> seen{};
  for (int i : idx) seen[static_cast<int>(labels[i])] = true;
  return seen[0] && seen[1] && seen[2];
}

inline DesignMatrix take_rows(const DesignMatrix& m,
                              const std::vector<int>& idx) {
  DesignMatrix out;
  out.feature_names = m.feature_names;
  out.rows.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (int i : idx) {
    out.rows.push_back(m.rows[i]);
    out.labels.push_back(m.labels[i]);
    if (!m.doc_ids.empty()) out.doc_ids.push_back(m.doc_ids[i]);
  }
  return out;
}

}  // namespace detail

/// Bootstrap comparison of two feature sets. Paired mode (the default)
/// resamples the training rows once per iteration, trains both models on
/// the same resample, and runs a paired two-sided t-test on the accuracy
/// differences; this maximizes power for detecting a real gap. Unpaired
/// mode draws an independent resample per arm and applies a pooled
/// two-sample t-test, the variant whose rejection rate is calibrated when
/// the two feature sets are interchangeable noise. The test set is fixed by
/// default and resampled per iteration behind the flag.
inline BootstrapResult bootstrap_compare(
    const DesignMatrix& train_matrix, const DesignMatrix& test_matrix,
    const std::vector<std::string>& first_features,
    const std::vector<std::string>& second_features, int n_samples,
    std::uint64_t seed, const Hyperparams& hp = {},
    bool resample_test = false, bool paired = true) {
  if (n_samples < 2) throw DomainError("bootstrap needs n_samples >= 2");
  const DesignMatrix train_first = train_matrix.select(first_features);
  const DesignMatrix train_second = train_matrix.select(second_features);
  const DesignMatrix test_first = test_matrix.select(first_features);
  const DesignMatrix test_second = test_matrix.select(second_features);

  BootstrapResult result;
  result.n_samples = n_samples;
  result.seed = seed;
  result.resampled_test = resample_test;
  result.paired = paired;
  result.accuracies.reserve(n_samples);

  constexpr int kMaxRedraws = 100;
  auto draw_indices = [&](SplitMix64& rng) {
    std::vector<int> idx;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      idx = detail::bootstrap_indices(train_matrix.n(), rng);
      if (detail::covers_all_classes(idx, train_matrix.labels)) return idx;
    }
    throw DegenerateInputError(
        "bootstrap resample kept missing a class after retries");
  };

  for (int iter = 0; iter < n_samples; ++iter) {
    SplitMix64 rng(derive_seed(seed, "bootstrap.iter." + std::to_string(iter)));
    const std::vector<int> idx = draw_indices(rng);
    const std::vector<int> idx_second = paired ? idx : draw_indices(rng);

    const DesignMatrix sample_first = detail::take_rows(train_first, idx);
    const DesignMatrix sample_second =
        detail::take_rows(train_second, idx_second);

    DesignMatrix eval_first = test_first;
    DesignMatrix eval_second = test_second;
    if (resample_test) {
      std::vector<int> tidx;
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        tidx = detail::bootstrap_indices(test_matrix.n(), rng);
        if (detail::covers_all_classes(tidx, test_matrix.labels)) break;
      }
      eval_first = detail::take_rows(test_first, tidx);
      eval_second = detail::take_rows(test_second, tidx);
    }

    const DifficultyModel model_first = train(sample_first, hp);
    const DifficultyModel model_second = train(sample_second, hp);
    const double acc_first = evaluate(model_first, eval_first).accuracy;
    const double acc_second = evaluate(model_second, eval_second).accuracy;
    result.accuracies.emplace_back(acc_first, acc_second);
  }

  if (paired) {
    std::vector<double> diffs;
    diffs.reserve(n_samples);
    for (const auto& [a, b] : result.accuracies) diffs.push_back(a - b);
    result.mean_diff = stats::mean_of(diffs);
    const double sd = stats::sample_std(diffs);
    if (sd == 0.0) {
      result.identical = true;
      result.t_statistic = 0.0;
      result.p_value = result.mean_diff == 0.0 ? 1.0 : 0.0;
    } else {
      result.t_statistic =
          result.mean_diff / (sd / std::sqrt(static_cast<double>(n_samples)));
      result.p_value =
          stats::student_t_two_sided_p(result.t_statistic, n_samples - 1);
    }
  } else {
    std::vector<double> first, second;
    for (const auto& [a, b] : result.accuracies) {
      first.push_back(a);
      second.push_back(b);
    }
    result.mean_diff = stats::mean_of(first) - stats::mean_of(second);
    const double sa = stats::sample_std(first);
    const double sb = stats::sample_std(second);
    const double n = n_samples;
    const double pooled =
        std::sqrt(((n - 1) * sa * sa + (n - 1) * sb * sb) / (2 * n - 2));
    if (pooled == 0.0) {
      result.identical = result.mean_diff == 0.0;
      result.t_statistic = 0.0;
      result.p_value = result.identical ? 1.0 : 0.0;
    } else {
      result.t_statistic = result.mean_diff / (pooled * std::sqrt(2.0 / n));
      result.p_value =
          stats::student_t_two_sided_p(result.t_statistic, 2 * n_samples - 2);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

inline std::string ranking_to_csv(const FRanking& ranking) {
  std::string out = "rank,feature,F,p\n";
  int rank = 1;
  for (const FScore& s : ranking.ranked) {
    out += std::to_string(rank++) + "," + s.name + "," + format_real(s.f) +
           "," + format_real(s.p) + "\n";
  }
  return out;
}

/// Two-block text table: top-k prompt metrics, then top-k static metrics.
/// A feature counts as a prompt metric when its name starts with "pm_".
inline std::string render_ranking_table(const FRanking& ranking, int top_k = 5) {
  auto is_prompt = [](const std::string& name) {
    return name.rfind("pm_", 0) == 0;
  };
  std::string out;
  char buf[256];
  auto emit_block = [&](const char* title, bool want_prompt) {
    out += title;
    out += "\n  Rank  Metric                                            F\n";
    int rank = 0;
    for (const FScore& s : ranking.ranked) {
      if (is_prompt(s.name) != want_prompt) continue;
      ++rank;
      if (rank > top_k) break;
      std::snprintf(buf, sizeof(buf), "  %4d  %-44s %10.2f%s\n", rank,
                    s.name.c_str(), s.f, s.p < 1e-5 ? "*" : "");
      out += buf;
    }
  };
  emit_block("Prompt metrics", true);
  emit_block("Static metrics", false);
  out += "* significance at >99.999% confidence\n";
  return out;
}

inline nlohmann::ordered_json bootstrap_to_json(const BootstrapResult& r) {
  nlohmann::ordered_json j;
  j["n_samples"] = r.n_samples;
  j["seed"] = r.seed;
  j["mean_diff"] = r.mean_diff;
  j["t_statistic"] = r.t_statistic;
  j["p_value"] = r.p_value;
  j["identical"] = r.identical;
  j["resampled_test"] = r.resampled_test;
  j["paired"] = r.paired;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& [a, b] : r.accuracies) pairs.push_back({a, b});
  j["accuracies"] = pairs;
  return j;
}

}  // namespace edulevel
