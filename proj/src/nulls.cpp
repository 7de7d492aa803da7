#include "marlaudit/nulls.hpp"

#include <algorithm>
#include <numeric>

#include "marlaudit/errors.hpp"
#include "marlaudit/parallel.hpp"
#include "marlaudit/rng.hpp"

namespace marlaudit {

TrajectoryDataset permute_actions(const TrajectoryDataset& d, std::uint64_t seed) {
  TrajectoryDataset out = d;
  for (std::size_t e = 0; e < out.episodes.size(); ++e) {
    auto& ep = out.episodes[e];
    for (std::size_t i = 0; i < ep.agents.size(); ++i) {
      auto& steps = ep.agents[i];
      std::vector<std::size_t> order(steps.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng = make_rng(seed, {e, i});
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<Action> actions;
      actions.reserve(steps.size());
      for (auto k : order) actions.push_back(d.episodes[e].agents[i][k].action);
      for (std::size_t t = 0; t < steps.size(); ++t) steps[t].action = std::move(actions[t]);
    }
  }
  return out;
}

std::uint64_t permutation_seed(std::uint64_t seed, std::size_t p) { return derive_seed(seed, {0x9e11, p}); }

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw ConfigError("percentile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double threshold_for(std::span<const double> samples, FlagRule rule) {
  return rule == FlagRule::Quantile95 ? percentile(samples, 95.0) : mean_of(samples);
}

}  // namespace

NullSummary null_distribution(const std::function<double(const TrajectoryDataset&)>& metric_fn,
                              const TrajectoryDataset& d, std::size_t n_perms, std::uint64_t seed, unsigned jobs) {
  if (n_perms == 0) throw ConfigError("n_permutations must be >= 1");
  NullSummary s;
  s.samples.resize(n_perms);
  parallel_for(n_perms, jobs, [&](std::size_t p) {
    try {
      s.samples[p] = metric_fn(permute_actions(d, permutation_seed(seed, p)));
    } catch (const std::exception& e) {
      throw EstimationError("permutation " + std::to_string(p) + ": " + e.what());
    }
  });
  s.raw_samples = s.samples;
  s.n_permutations = n_perms;
  s.seed = seed;
  s.basis = NullBasis::Raw;
  s.mean = mean_of(s.samples);
  s.threshold = s.mean;
  return s;
}

double compared_value(const DiagnosticResult& r) {
  if (r.null && r.null->basis == NullBasis::Normalized && r.normalized) return *r.normalized;
  return r.raw.value;
}

void calibrate(std::vector<DiagnosticResult>& results, const TrajectoryDataset& d, const DiagnosticConfig& cfg,
               std::size_t n_perms, std::uint64_t seed, FlagRule rule, unsigned jobs) {
  if (n_perms == 0) throw ConfigError("n_permutations must be >= 1");
  std::vector<std::size_t> live;
  for (std::size_t r = 0; r < results.size(); ++r)
    if (!results[r].skipped) live.push_back(r);

  std::vector<TrajectoryDataset> replicas(n_perms);
  parallel_for(n_perms, jobs, [&](std::size_t p) { replicas[p] = permute_actions(d, permutation_seed(seed, p)); });

  struct Slot {
    double raw = 0.0;
    std::optional<double> normalized;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(live.size() * n_perms);
  parallel_for(slots.size(), jobs, [&](std::size_t k) {
    const std::size_t p = k % n_perms;
    const auto& orig = results[live[k / n_perms]];
    try {
      const auto r = compute_metric(replicas[p], orig.metric, orig.subject, cfg);
      slots[k] = {r.raw.value, r.normalized, std::nullopt};
    } catch (const EstimationError& e) {
      slots[k].error = "permutation " + std::to_string(p) + ": " + e.what();
    }
  });
  replicas.clear();

  for (std::size_t l = 0; l < live.size(); ++l) {
    auto& res = results[live[l]];
    const std::span<const Slot> row(slots.data() + l * n_perms, n_perms);
    const auto failed = std::find_if(row.begin(), row.end(), [](const Slot& s) { return s.error.has_value(); });
    if (failed != row.end()) {
      res.skipped = "null " + *failed->error;
      res.flagged.reset();
      continue;
    }
    NullSummary s;
    s.n_permutations = n_perms;
    s.seed = seed;
    s.rule = rule;
    const bool normalized = res.normalized.has_value() &&
                            std::all_of(row.begin(), row.end(), [](const Slot& x) { return x.normalized.has_value(); });
    s.basis = normalized ? NullBasis::Normalized : NullBasis::Raw;
    for (const auto& x : row) {
      s.raw_samples.push_back(x.raw);
      s.samples.push_back(normalized ? *x.normalized : x.raw);
    }
    s.mean = mean_of(s.samples);
    s.threshold = threshold_for(s.samples, rule);
    res.null = std::move(s);
    res.flagged = compared_value(res) > res.null->threshold;
  }
}

}  // namespace marlaudit
