#include "marlaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "marlaudit/errors.hpp"
#include "marlaudit/nulls.hpp"
#include "marlaudit/rng.hpp"

namespace marlaudit {

double median(std::span<const double> values) {
  if (values.empty()) throw ConfigError("median of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

// Ranks of |x| doubled so tie averages stay integral; returns the tie group sizes.
std::vector<std::int64_t> doubled_ranks(std::span<const double> x, std::vector<std::size_t>& ties) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(x[a]) < std::abs(x[b]); });
  std::vector<std::int64_t> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(x[order[j + 1]]) == std::abs(x[order[i]])) ++j;
    const auto r2 = static_cast<std::int64_t>(i + 1 + j + 1);  // 2 * average of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
    ties.push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

}  // namespace

GapResult wilcoxon_one_sided(std::span<const double> deltas) {
  if (deltas.empty()) throw ConfigError("signed-rank test needs at least one delta");
  GapResult g;
  g.deltas.assign(deltas.begin(), deltas.end());
  g.median = median(deltas);
  std::vector<double> nz;
  for (double d : deltas) {
    if (!std::isfinite(d)) throw ConfigError("signed-rank test: non-finite delta");
    if (d != 0.0) nz.push_back(d);
  }
  g.zeros_discarded = deltas.size() - nz.size();
  g.n_used = nz.size();
  if (nz.empty()) {
    g.degenerate = true;
    g.method = "degenerate";
    g.p_value = 1.0;
    return g;
  }

  std::vector<std::size_t> ties;
  const auto ranks = doubled_ranks(nz, ties);
  std::int64_t w2 = 0;
  for (std::size_t i = 0; i < nz.size(); ++i)
    if (nz[i] > 0) w2 += ranks[i];
  g.statistic = static_cast<double>(w2) / 2.0;
  const auto n = static_cast<double>(nz.size());

  if (nz.size() <= kWilcoxonExactMax) {
    g.method = "exact";
    const std::int64_t total = std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0});
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    std::int64_t reach = 0;
    for (auto r : ranks) {
      for (std::int64_t s = reach; s >= 0; --s)
        if (count[s] != 0.0) count[s + r] += count[s];
      reach += r;
    }
    double upper = 0.0;
    for (std::int64_t s = w2; s <= total; ++s) upper += count[s];
    g.p_value = std::ldexp(upper, -static_cast<int>(nz.size()));
  } else {
    g.method = "normal";
    double tie_term = 0.0;
    for (auto t : ties) tie_term += std::pow(static_cast<double>(t), 3) - static_cast<double>(t);
    const double mean = n * (n + 1) / 4.0;
    const double var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      g.p_value = g.statistic > mean ? 0.0 : 1.0;
    } else {
      const double z = (g.statistic - mean - 0.5) / std::sqrt(var);
      g.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
    }
  }
  g.p_value = std::clamp(g.p_value, 0.0, 1.0);
  g.significant = g.p_value < kSignificanceLevel;
  return g;
}

double iqm(std::span<const double> values) {
  if (values.empty()) throw ConfigError("IQM of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t cut = v.size() >= 4 ? v.size() / 4 : 0;
  const auto first = v.begin() + static_cast<std::ptrdiff_t>(cut);
  const auto last = v.end() - static_cast<std::ptrdiff_t>(cut);
  return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

std::vector<std::pair<double, double>> stratified_bootstrap_ci(const std::vector<std::vector<double>>& curves,
                                                               std::size_t n_boot, std::uint64_t seed) {
  if (curves.size() < 2) throw ConfigError("CI undefined: need at least 2 runs");
  if (n_boot == 0) throw ConfigError("CI undefined: n_boot must be >= 1");
  const std::size_t points = curves.front().size();
  for (const auto& c : curves)
    if (c.size() != points) throw ConfigError("bootstrap: runs have different numbers of evaluation points");

  const std::size_t runs = curves.size();
  std::vector<std::vector<double>> stats(points, std::vector<double>(n_boot));
  std::vector<std::size_t> pick(runs);
  std::vector<double> column(runs);
  for (std::size_t b = 0; b < n_boot; ++b) {
    Rng rng = make_rng(seed, {0xb007, b});
    std::uniform_int_distribution<std::size_t> draw(0, runs - 1);
    for (auto& p : pick) p = draw(rng);
    for (std::size_t p = 0; p < points; ++p) {
      for (std::size_t r = 0; r < runs; ++r) column[r] = curves[pick[r]][p];
      stats[p][b] = iqm(column);
    }
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(points);
  for (const auto& s : stats) out.emplace_back(percentile(s, 2.5), percentile(s, 97.5));
  return out;
}

std::vector<double> minmax_normalize(std::span<const double> values, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("min-max normalization needs hi > lo");
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - lo) / (hi - lo));
  return out;
}

}  // namespace marlaudit
