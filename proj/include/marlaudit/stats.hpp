#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace marlaudit {

inline constexpr double kSignificanceLevel = 0.05;
// Largest number of non-zero deltas for which the exact null is enumerated.
inline constexpr std::size_t kWilcoxonExactMax = 25;

struct GapResult {
  std::vector<double> deltas;  // paired differences, memory minus feed-forward
  std::size_t n_used = 0;      // after discarding zeros
  std::size_t zeros_discarded = 0;
  double statistic = 0.0;      // W+, sum of ranks of positive deltas
  double p_value = 1.0;
  bool significant = false;    // p_value < 0.05
  std::string method;          // "exact", "normal" or "degenerate"
  double median = 0.0;         // median of all deltas
  bool degenerate = false;     // every delta was zero
};

// One-sided signed-rank test of H1: median(delta) > 0. Zeros are discarded,
// tied magnitudes get average ranks. Exact for up to 25 non-zero deltas,
// otherwise normal approximation with continuity and tie corrections.
GapResult wilcoxon_one_sided(std::span<const double> deltas);

double median(std::span<const double> values);

// Mean after trimming floor(n/4) values from each end; plain mean for n < 4.
double iqm(std::span<const double> values);

// Resamples whole runs with replacement n_boot times and returns, per
// evaluation point, the 2.5th and 97.5th percentiles of the resampled IQM.
// curves[r][p] is run r at point p.
std::vector<std::pair<double, double>> stratified_bootstrap_ci(const std::vector<std::vector<double>>& curves,
                                                               std::size_t n_boot, std::uint64_t seed);

std::vector<double> minmax_normalize(std::span<const double> values, double lo, double hi);

}  // namespace marlaudit
