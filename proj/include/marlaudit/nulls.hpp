#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "marlaudit/diagnostics.hpp"
#include "marlaudit/trajectory.hpp"

namespace marlaudit {

inline constexpr std::size_t kDefaultPermutations = 20;

// Shuffles each agent's action sequence within each episode, independently
// per (episode, agent). Observations and hidden states are untouched.
TrajectoryDataset permute_actions(const TrajectoryDataset& d, std::uint64_t seed);

// Seed of the p-th permuted replicate under master `seed`.
std::uint64_t permutation_seed(std::uint64_t seed, std::size_t p);

// metric_fn evaluated on n_perms permuted copies of d. A failure on any
// replicate is rethrown as EstimationError naming the permutation index.
NullSummary null_distribution(const std::function<double(const TrajectoryDataset&)>& metric_fn,
                              const TrajectoryDataset& d, std::size_t n_perms, std::uint64_t seed,
                              unsigned jobs = 1);

// Fills `null` and `flagged` for every non-skipped result computed on d.
// Each permuted replicate is built once and shared across all results; the
// replicate seeds match null_distribution. The compared quantity is the
// normalized value when it is defined on the original and on every
// replicate, else the raw estimate. A result whose null cannot be estimated
// is marked skipped.
void calibrate(std::vector<DiagnosticResult>& results, const TrajectoryDataset& d, const DiagnosticConfig& cfg,
               std::size_t n_perms, std::uint64_t seed, FlagRule rule = FlagRule::MeanExceedance,
               unsigned jobs = 1);

// Value compared against the null threshold (normalized or raw per basis).
double compared_value(const DiagnosticResult& r);

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::span<const double> values, double q);

}  // namespace marlaudit
