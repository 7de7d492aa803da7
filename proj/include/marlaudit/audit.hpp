#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "marlaudit/diagnostics.hpp"
#include "marlaudit/nulls.hpp"
#include "marlaudit/stats.hpp"
#include "marlaudit/trajectory.hpp"

namespace marlaudit {

enum class Verdict { Yes, No, NotEvaluable };
std::string_view verdict_name(Verdict v);  // "yes" | "no" | "not-evaluable"

// RNN, GRU, LSTM, RECURRENT (case-insensitive) count as memory policies;
// FF, MLP, FEEDFORWARD as feed-forward. Anything else is neither.
bool is_memory_architecture(std::string_view label);
bool is_feedforward_architecture(std::string_view label);

struct RunRecord {
  std::string label;
  Manifest manifest;
  std::vector<DiagnosticResult> diagnostics;  // empty for returns-only runs
  std::vector<double> returns;                // per-evaluation mean returns; the last is J(pi)
  bool has_dataset = false;
};

// Two-stage max of (compared value - null threshold) over subjects and runs.
struct RuleEvidence {
  Verdict verdict = Verdict::NotEvaluable;
  std::size_t n_results = 0;  // calibrated results considered
  std::size_t n_skipped = 0;
  std::optional<double> max_margin;
  std::string winner_run;
  std::string winner_subject;
  double winner_value = 0.0;
  double winner_threshold = 0.0;
  NullBasis winner_basis = NullBasis::Normalized;
  std::string note;
};

struct GapPair {
  std::string algorithm;
  std::int64_t seed = 0;
  double memory_return = 0.0;
  double feedforward_return = 0.0;
  double delta = 0.0;
};

struct MemoryEvidence {
  Verdict verdict = Verdict::NotEvaluable;
  std::vector<GapPair> pairs;
  std::optional<GapResult> gap;
  RuleEvidence har;
  std::string note;
};

struct ScenarioVerdict {
  std::string scenario;
  std::string group;
  Verdict memory_benefit = Verdict::NotEvaluable;
  Verdict uses_private_info = Verdict::NotEvaluable;
  Verdict synchronous_coordination = Verdict::NotEvaluable;
  Verdict temporal_coordination = Verdict::NotEvaluable;
  MemoryEvidence memory;
  RuleEvidence pif;
  RuleEvidence aa;
  RuleEvidence dai;
  std::vector<RunRecord> runs;
};

// Rules 2-4: Yes iff some calibrated result of metric m in any run exceeds
// its null threshold. Throws ConfigError when no result of m is present;
// NotEvaluable when every one of them was skipped.
RuleEvidence rule_threshold(MetricId m, std::span<const RunRecord> runs);

// Memory/feed-forward pairs matched on (algorithm, seed), ordered by that key.
std::vector<GapPair> pair_returns(std::span<const RunRecord> runs);

// Rule 1: Yes iff gap.significant and some memory-policy HAR exceeds its null.
// Without memory-policy diagnostics the answer is No ("no memory policies").
MemoryEvidence rule_memory_benefit(const GapResult& gap, std::span<const RunRecord> runs);

// Applies all four rules to the runs of one scenario. Rule 1 is NotEvaluable
// without at least one matched memory/feed-forward pair.
ScenarioVerdict aggregate_scenario(std::string scenario, std::string group, std::vector<RunRecord> runs);

struct AuditSettings {
  std::uint64_t seed = 0;
  std::size_t n_permutations = kDefaultPermutations;
  FlagRule rule = FlagRule::MeanExceedance;
  std::optional<HistoryMode> history;
  int k_neighbors = kDefaultNeighbors;
  std::size_t sample_cap = kDefaultSampleCap;
  std::size_t n_boot = 2000;
};

DiagnosticConfig diagnostic_config(const AuditSettings& s);

// Diagnostics for every metric and subject, calibrated against the
// permutation null. Replicate seeds derive from the master seed alone.
RunRecord audit_dataset(const TrajectoryDataset& d, std::vector<double> returns, const AuditSettings& s,
                        unsigned jobs = 1);

enum class ReportFormat { Json, Markdown };
ReportFormat parse_report_format(std::string_view name);

struct ReportContext {
  AuditSettings settings;
  std::vector<std::pair<std::string, std::string>> failures;  // scenario, message
};

// Table-style grid over scenario groups plus per-scenario answers (markdown),
// or every verdict with full evidence (json). Throws ConfigError when there is
// nothing to report.
std::string emit_report(std::span<const ScenarioVerdict> verdicts, ReportFormat format, const ReportContext& ctx = {});

// Full evidence for one scenario, pretty-printed JSON.
std::string verdict_json(const ScenarioVerdict& v, const ReportContext& ctx = {});

// "67% (2/3)", or "n/a" when total is 0.
std::string percent_cell(std::size_t count, std::size_t total);

}  // namespace marlaudit
