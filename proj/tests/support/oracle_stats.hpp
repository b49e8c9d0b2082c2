#pragma once

// Brute-force one-way ANOVA used as the independent check on f_classif:
// explicit group vectors, two-pass means, textbook sums of squares.

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "edulevel/stats.hpp"
#include "edulevel/types.hpp"

namespace edulevel::testing::oracle {

inline std::pair<double, double> anova_brute_force(
    const std::vector<double>& x, const std::vector<Level>& y) {
  std::vector<std::vector<double>> groups(3);
  for (std::size_t i = 0; i < x.size(); ++i)
    groups[static_cast<int>(y[i])].push_back(x[i]);
  groups.erase(std::remove_if(groups.begin(), groups.end(),
                              [](const auto& g) { return g.empty(); }),
               groups.end());
  const int K = static_cast<int>(groups.size());
  const int N = static_cast<int>(x.size());
  double grand = 0;
  for (double v : x) grand += v;
  grand /= N;
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    double m = 0;
    for (double v : g) m += v;
    m /= g.size();
    ssb += g.size() * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  const double df1 = K - 1, df2 = N - K;
  if (ssw <= 0) return {std::numeric_limits<double>::max(), 0.0};
  const double F = (ssb / df1) / (ssw / df2);
  return {F, stats::f_sf(F, df1, df2)};
}

}  // namespace edulevel::testing::oracle
