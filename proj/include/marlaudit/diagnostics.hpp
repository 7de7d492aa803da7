#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marlaudit/estimators.hpp"
#include "marlaudit/history.hpp"
#include "marlaudit/trajectory.hpp"

namespace marlaudit {

enum class MetricId { OAR, HAR, PIF, AA, DAI };

inline constexpr MetricId kAllMetrics[] = {MetricId::OAR, MetricId::HAR, MetricId::PIF, MetricId::AA, MetricId::DAI};

std::string_view metric_name(MetricId m);
MetricId parse_metric(std::string_view name);
inline bool is_pair_metric(MetricId m) { return m == MetricId::PIF || m == MetricId::AA || m == MetricId::DAI; }

// Normalization is undefined when the denominator does not exceed this (nats).
inline constexpr double kDenominatorEpsilon = 1e-3;
inline constexpr std::size_t kDefaultSampleCap = 50000;

// An agent (per-agent metrics) or an ordered pair source -> target.
struct Subject {
  std::size_t source = 0;
  std::optional<std::size_t> target;

  static Subject agent(std::size_t i) { return {i, std::nullopt}; }
  static Subject pair(std::size_t i, std::size_t j) { return {i, j}; }
  std::string label() const;
  bool operator==(const Subject&) const = default;
};

enum class NullBasis { Normalized, Raw };
// MeanExceedance flags value > null mean; Quantile95 flags value > 95th percentile.
enum class FlagRule { MeanExceedance, Quantile95 };

struct NullSummary {
  std::vector<double> samples;      // compared quantity per permutation (see basis)
  double mean = 0.0;
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
  NullBasis basis = NullBasis::Normalized;
  std::vector<double> raw_samples;  // raw estimates per permutation
  FlagRule rule = FlagRule::MeanExceedance;
  double threshold = 0.0;           // mean or 95th percentile of samples, per rule
};

struct TimestepTerm {
  std::size_t t = 0;
  std::size_t n_samples = 0;
  double cmi = 0.0;
  double cond_entropy = 0.0;
};

struct DiagnosticResult {
  MetricId metric = MetricId::OAR;
  Subject subject;
  EstimateNats raw;
  std::optional<double> normalized;  // nullopt = Undefined
  EstimateNats denominator;
  std::optional<NullSummary> null;
  std::optional<bool> flagged;
  std::string history;                 // history mode used, e.g. "window:4"
  std::vector<TimestepTerm> timesteps;  // DAI only: per-t terms that were averaged
  std::vector<std::size_t> skipped_timesteps;
  std::optional<std::string> skipped;   // reason when the metric could not be computed
};

struct DiagnosticConfig {
  std::optional<HistoryMode> history;  // nullopt: hidden states when recorded, else window:4
  int k_neighbors = kDefaultNeighbors;
  std::size_t sample_cap = kDefaultSampleCap;
  std::uint64_t seed = 0;
};

// Resolves the history mode actually used for `d`. Throws ConfigError when
// hidden states are requested but not recorded, or for a zero-length window.
HistoryMode resolve_history(const TrajectoryDataset& d, const DiagnosticConfig& cfg);
std::string history_label(HistoryMode m);
HistoryMode parse_history(std::string_view text);  // "hidden" | "window:K"

// Estimator inputs for one (metric, subject), pooled over (episode, t) and
// capped at cfg.sample_cap rows. DAI uses per-timestep pools instead, see
// dai_columns_at. Exposed for layout audits.
struct MetricColumns {
  SampleColumn source;
  SampleColumn target;
  std::optional<SampleColumn> conditioner;
};
MetricColumns metric_columns(const TrajectoryDataset& d, MetricId m, Subject s, const DiagnosticConfig& cfg);
// Rows are the episodes long enough to reach t (t >= 1).
MetricColumns dai_columns_at(const TrajectoryDataset& d, Subject s, std::size_t t, const DiagnosticConfig& cfg);

DiagnosticResult compute_oar(const TrajectoryDataset& d, std::size_t agent, const DiagnosticConfig& cfg);
DiagnosticResult compute_har(const TrajectoryDataset& d, std::size_t agent, const DiagnosticConfig& cfg);
DiagnosticResult compute_pif(const TrajectoryDataset& d, std::size_t i, std::size_t j, const DiagnosticConfig& cfg);
DiagnosticResult compute_aa(const TrajectoryDataset& d, std::size_t i, std::size_t j, const DiagnosticConfig& cfg);
DiagnosticResult compute_dai(const TrajectoryDataset& d, std::size_t i, std::size_t j, const DiagnosticConfig& cfg);

DiagnosticResult compute_metric(const TrajectoryDataset& d, MetricId m, Subject s, const DiagnosticConfig& cfg);

// Every subject of a metric: agents in index order, or ordered pairs (i, j), i != j.
std::vector<Subject> subjects_for(const TrajectoryDataset& d, MetricId m);

// All metrics over all subjects, metric-major. Estimation failures are kept
// as results with `skipped` set; configuration errors propagate.
std::vector<DiagnosticResult> compute_all(const TrajectoryDataset& d, const DiagnosticConfig& cfg, unsigned jobs = 1);

}  // namespace marlaudit
