#include "marlaudit/audit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "marlaudit/errors.hpp"

namespace marlaudit {

using ordered_json = nlohmann::ordered_json;

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::NotEvaluable: return "not-evaluable";
  }
  return "?";
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

bool is_memory_architecture(std::string_view label) {
  const auto u = upper(label);
  return u == "RNN" || u == "GRU" || u == "LSTM" || u == "RECURRENT";
}

bool is_feedforward_architecture(std::string_view label) {
  const auto u = upper(label);
  return u == "FF" || u == "MLP" || u == "FEEDFORWARD";
}

namespace {

RuleEvidence max_exceedance(MetricId m, std::span<const RunRecord> runs, bool memory_only) {
  RuleEvidence ev;
  bool seen = false;
  for (const auto& run : runs) {
    if (memory_only && !is_memory_architecture(run.manifest.architecture)) continue;
    for (const auto& r : run.diagnostics) {
      if (r.metric != m) continue;
      seen = true;
      if (r.skipped || !r.null || !r.flagged) {
        ++ev.n_skipped;
        continue;
      }
      ++ev.n_results;
      const double value = compared_value(r);
      const double margin = value - r.null->threshold;
      if (!ev.max_margin || margin > *ev.max_margin) {
        ev.max_margin = margin;
        ev.winner_run = run.label;
        ev.winner_subject = r.subject.label();
        ev.winner_value = value;
        ev.winner_threshold = r.null->threshold;
        ev.winner_basis = r.null->basis;
      }
    }
  }
  if (!seen) {
    ev.note = "no results";
    return ev;
  }
  if (!ev.max_margin) {
    ev.note = "every result was skipped";
    return ev;
  }
  ev.verdict = *ev.max_margin > 0.0 ? Verdict::Yes : Verdict::No;
  return ev;
}

}  // namespace

RuleEvidence rule_threshold(MetricId m, std::span<const RunRecord> runs) {
  auto ev = max_exceedance(m, runs, false);
  if (ev.note == "no results")
    throw ConfigError("no " + std::string(metric_name(m)) + " results to aggregate");
  return ev;
}

std::vector<GapPair> pair_returns(std::span<const RunRecord> runs) {
  using Key = std::pair<std::string, std::int64_t>;
  std::map<Key, double> memory, feedforward;
  for (const auto& run : runs) {
    if (run.returns.empty()) continue;
    const Key key{run.manifest.algorithm, run.manifest.seed};
    std::map<Key, double>* side = nullptr;
    if (is_memory_architecture(run.manifest.architecture)) side = &memory;
    if (is_feedforward_architecture(run.manifest.architecture)) side = &feedforward;
    if (!side) continue;
    if (!side->emplace(key, run.returns.back()).second)
      throw ConfigError("two " + run.manifest.architecture + " runs share algorithm " + key.first + " and seed " +
                        std::to_string(key.second));
  }
  std::vector<GapPair> pairs;
  for (const auto& [key, mem] : memory) {
    const auto ff = feedforward.find(key);
    if (ff == feedforward.end()) continue;
    pairs.push_back({key.first, key.second, mem, ff->second, mem - ff->second});
  }
  return pairs;
}

MemoryEvidence rule_memory_benefit(const GapResult& gap, std::span<const RunRecord> runs) {
  MemoryEvidence ev;
  ev.gap = gap;
  ev.har = max_exceedance(MetricId::HAR, runs, true);
  if (ev.har.note == "no results") {
    ev.har.verdict = Verdict::No;
    ev.note = "no memory policies";
    ev.verdict = Verdict::No;
    return ev;
  }
  ev.verdict = gap.significant && ev.har.verdict == Verdict::Yes ? Verdict::Yes : Verdict::No;
  return ev;
}

ScenarioVerdict aggregate_scenario(std::string scenario, std::string group, std::vector<RunRecord> runs) {
  if (runs.empty()) throw ConfigError("scenario '" + scenario + "' has no runs");
  ScenarioVerdict v;
  v.scenario = std::move(scenario);
  v.group = std::move(group);
  v.runs = std::move(runs);

  const auto pairs = pair_returns(v.runs);
  if (pairs.empty()) {
    v.memory.note = "no matched memory/feed-forward runs";
    v.memory.har = max_exceedance(MetricId::HAR, v.runs, true);
  } else {
    std::vector<double> deltas;
    for (const auto& p : pairs) deltas.push_back(p.delta);
    v.memory = rule_memory_benefit(wilcoxon_one_sided(deltas), v.runs);
    v.memory.pairs = pairs;
  }
  v.memory_benefit = v.memory.verdict;

  const bool any_dataset = std::any_of(v.runs.begin(), v.runs.end(), [](const RunRecord& r) { return r.has_dataset; });
  if (any_dataset) {
    v.pif = rule_threshold(MetricId::PIF, v.runs);
    v.aa = rule_threshold(MetricId::AA, v.runs);
    v.dai = rule_threshold(MetricId::DAI, v.runs);
  } else {
    v.pif.note = v.aa.note = v.dai.note = "no datasets";
  }
  v.uses_private_info = v.pif.verdict;
  v.synchronous_coordination = v.aa.verdict;
  v.temporal_coordination = v.dai.verdict;
  return v;
}

DiagnosticConfig diagnostic_config(const AuditSettings& s) {
  DiagnosticConfig cfg;
  cfg.history = s.history;
  cfg.k_neighbors = s.k_neighbors;
  cfg.sample_cap = s.sample_cap;
  cfg.seed = s.seed;
  return cfg;
}

RunRecord audit_dataset(const TrajectoryDataset& d, std::vector<double> returns, const AuditSettings& s,
                        unsigned jobs) {
  const auto cfg = diagnostic_config(s);
  RunRecord run;
  run.manifest = d.manifest;
  run.label = d.manifest.algorithm + "-" + d.manifest.architecture + " seed " + std::to_string(d.manifest.seed);
  run.returns = std::move(returns);
  run.has_dataset = true;
  run.diagnostics = compute_all(d, cfg, jobs);
  calibrate(run.diagnostics, d, cfg, s.n_permutations, s.seed, s.rule, jobs);
  return run;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + std::string(name) + "' (expected json or markdown)");
}

std::string percent_cell(std::size_t count, std::size_t total) {
  if (total == 0) return "n/a";
  const auto pct = static_cast<long long>(std::lround(100.0 * static_cast<double>(count) / static_cast<double>(total)));
  return std::to_string(pct) + "% (" + std::to_string(count) + "/" + std::to_string(total) + ")";
}

namespace {

const char* basis_name(NullBasis b) { return b == NullBasis::Normalized ? "normalized" : "raw"; }
const char* rule_name(FlagRule r) { return r == FlagRule::Quantile95 ? "quantile95" : "mean"; }

ordered_json optional_number(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); }

ordered_json estimate_json(const EstimateNats& e) {
  ordered_json j;
  j["value_nats"] = e.value;
  j["estimator"] = e.estimator_id;
  j["k_neighbors"] = e.k_neighbors;
  j["n_samples"] = e.n_samples;
  if (!e.warnings.empty()) j["warnings"] = e.warnings;
  return j;
}

ordered_json result_json(const DiagnosticResult& r) {
  ordered_json j;
  j["metric"] = metric_name(r.metric);
  j["subject"] = r.subject.label();
  j["history"] = r.history;
  if (r.skipped) {
    j["skipped"] = *r.skipped;
    return j;
  }
  j["raw"] = estimate_json(r.raw);
  j["display_nats"] = std::max(r.raw.value, 0.0);
  j["normalized"] = optional_number(r.normalized);
  j["denominator"] = estimate_json(r.denominator);
  if (r.null) {
    ordered_json n;
    n["basis"] = basis_name(r.null->basis);
    n["rule"] = rule_name(r.null->rule);
    n["mean"] = r.null->mean;
    n["threshold"] = r.null->threshold;
    n["n_permutations"] = r.null->n_permutations;
    n["seed"] = r.null->seed;
    n["samples"] = r.null->samples;
    n["raw_samples"] = r.null->raw_samples;
    j["null"] = std::move(n);
  }
  j["flagged"] = r.flagged ? ordered_json(*r.flagged) : ordered_json(nullptr);
  if (!r.timesteps.empty()) {
    ordered_json ts = ordered_json::array();
    for (const auto& t : r.timesteps)
      ts.push_back({{"t", t.t}, {"n_samples", t.n_samples}, {"cmi_nats", t.cmi}, {"cond_entropy_nats", t.cond_entropy}});
    j["timesteps"] = std::move(ts);
    j["skipped_timesteps"] = r.skipped_timesteps;
  }
  return j;
}

ordered_json rule_json(const RuleEvidence& e) {
  ordered_json j;
  j["verdict"] = verdict_name(e.verdict);
  j["n_results"] = e.n_results;
  j["n_skipped"] = e.n_skipped;
  j["max_margin"] = optional_number(e.max_margin);
  if (e.max_margin) {
    j["winner"] = {{"run", e.winner_run},
                   {"subject", e.winner_subject},
                   {"value", e.winner_value},
                   {"threshold", e.winner_threshold},
                   {"basis", basis_name(e.winner_basis)}};
  }
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

ordered_json memory_json(const MemoryEvidence& m) {
  ordered_json j;
  j["verdict"] = verdict_name(m.verdict);
  ordered_json pairs = ordered_json::array();
  for (const auto& p : m.pairs)
    pairs.push_back({{"algorithm", p.algorithm},
                     {"seed", p.seed},
                     {"memory_return", p.memory_return},
                     {"feedforward_return", p.feedforward_return},
                     {"delta", p.delta}});
  j["pairs"] = std::move(pairs);
  if (m.gap) {
    const auto& g = *m.gap;
    j["gap"] = {{"method", g.method},     {"n_used", g.n_used},
                {"zeros_discarded", g.zeros_discarded}, {"statistic", g.statistic},
                {"p_value", g.p_value},   {"significant", g.significant},
                {"median", g.median},     {"degenerate", g.degenerate}};
  } else {
    j["gap"] = nullptr;
  }
  j["har"] = rule_json(m.har);
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

ordered_json returns_json(const ScenarioVerdict& v, const AuditSettings& s) {
  std::vector<double> all;
  for (const auto& r : v.runs)
    if (!r.returns.empty()) all.push_back(r.returns.back());
  ordered_json j = ordered_json::object();
  if (all.empty()) return j;
  const auto [lo_it, hi_it] = std::minmax_element(all.begin(), all.end());
  const double lo = *lo_it, hi = *hi_it;
  for (const bool memory : {true, false}) {
    std::vector<double> finals;
    for (const auto& r : v.runs) {
      const bool cls = memory ? is_memory_architecture(r.manifest.architecture)
                              : is_feedforward_architecture(r.manifest.architecture);
      if (cls && !r.returns.empty()) finals.push_back(r.returns.back());
    }
    if (finals.empty()) continue;
    ordered_json c;
    c["n_runs"] = finals.size();
    c["iqm"] = iqm(finals);
    if (hi > lo) c["normalized_iqm"] = iqm(minmax_normalize(finals, lo, hi));
    if (finals.size() >= 2) {
      std::vector<std::vector<double>> curves;
      for (double f : finals) curves.push_back({f});
      const auto ci = stratified_bootstrap_ci(curves, s.n_boot, s.seed).front();
      c["ci95"] = {ci.first, ci.second};
    }
    j[memory ? "memory" : "feedforward"] = std::move(c);
  }
  return j;
}

ordered_json settings_json(const AuditSettings& s) {
  ordered_json j;
  j["seed"] = s.seed;
  j["n_permutations"] = s.n_permutations;
  j["flag_rule"] = rule_name(s.rule);
  j["history"] = s.history ? history_label(*s.history) : "auto";
  j["k_neighbors"] = s.k_neighbors;
  j["sample_cap"] = s.sample_cap;
  j["n_boot"] = s.n_boot;
  j["units"] = "nats";
  return j;
}

ordered_json verdict_object(const ScenarioVerdict& v, const ReportContext& ctx) {
  ordered_json j;
  j["scenario"] = v.scenario;
  j["group"] = v.group;
  j["verdict"] = {{"memory_benefit", verdict_name(v.memory_benefit)},
                  {"uses_private_info", verdict_name(v.uses_private_info)},
                  {"synchronous_coordination", verdict_name(v.synchronous_coordination)},
                  {"temporal_coordination", verdict_name(v.temporal_coordination)}};
  j["evidence"] = {{"memory_benefit", memory_json(v.memory)},
                   {"uses_private_info", rule_json(v.pif)},
                   {"synchronous_coordination", rule_json(v.aa)},
                   {"temporal_coordination", rule_json(v.dai)}};
  j["returns"] = returns_json(v, ctx.settings);
  ordered_json runs = ordered_json::array();
  for (const auto& r : v.runs) {
    ordered_json rj;
    rj["label"] = r.label;
    rj["algorithm"] = r.manifest.algorithm;
    rj["architecture"] = r.manifest.architecture;
    rj["seed"] = r.manifest.seed;
    rj["returns"] = r.returns;
    if (r.has_dataset) {
      rj["dataset_scenario"] = r.manifest.scenario;
      rj["checkpoint_fraction"] = r.manifest.checkpoint_fraction;
      ordered_json diags = ordered_json::array();
      for (const auto& d : r.diagnostics) diags.push_back(result_json(d));
      rj["diagnostics"] = std::move(diags);
    }
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  j["settings"] = settings_json(ctx.settings);
  j["assumptions"] = {"hidden states are recorded after the observation and before the action",
                      "noise scale for perturbed datasets is computed over the perturbed dataset itself"};
  return j;
}

constexpr const char* kQuestions[] = {
    "Do agents benefit from memory?",
    "Do agents use hidden teammate information?",
    "Does synchronous coordination emerge?",
    "Does temporal coordination emerge?",
};

Verdict answer(const ScenarioVerdict& v, int q) {
  switch (q) {
    case 0: return v.memory_benefit;
    case 1: return v.uses_private_info;
    case 2: return v.synchronous_coordination;
    default: return v.temporal_coordination;
  }
}

std::string cell(Verdict v) { return v == Verdict::NotEvaluable ? "n/a" : std::string(verdict_name(v)); }

std::string markdown_report(std::span<const ScenarioVerdict> verdicts, const ReportContext& ctx) {
  std::vector<std::string> groups;
  for (const auto& v : verdicts)
    if (std::find(groups.begin(), groups.end(), v.group) == groups.end()) groups.push_back(v.group);

  std::ostringstream out;
  out << "# Audit report\n\n";
  out << "Share of evaluable scenarios per group where the decision rule holds, shown as percent (count/total).\n\n";
  out << "| Question |";
  for (const auto& g : groups) out << ' ' << g << " |";
  out << "\n|---|";
  for (std::size_t g = 0; g < groups.size(); ++g) out << "---|";
  out << '\n';
  for (int q = 0; q < 4; ++q) {
    out << "| " << kQuestions[q] << " |";
    for (const auto& g : groups) {
      std::size_t yes = 0, total = 0;
      for (const auto& v : verdicts) {
        if (v.group != g) continue;
        const auto a = answer(v, q);
        if (a == Verdict::NotEvaluable) continue;
        ++total;
        if (a == Verdict::Yes) ++yes;
      }
      out << ' ' << percent_cell(yes, total) << " |";
    }
    out << '\n';
  }

  out << "\n## Scenarios\n\n";
  out << "| Scenario | Group | Runs | Memory | Private info | Synchronous | Temporal |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& v : verdicts) {
    out << "| " << v.scenario << " | " << v.group << " | " << v.runs.size() << " | " << cell(v.memory_benefit) << " | "
        << cell(v.uses_private_info) << " | " << cell(v.synchronous_coordination) << " | "
        << cell(v.temporal_coordination) << " |\n";
  }

  if (!ctx.failures.empty()) {
    out << "\n## Failures\n\n";
    for (const auto& [name, msg] : ctx.failures) out << "- " << name << ": " << msg << '\n';
  }

  const auto& s = ctx.settings;
  out << "\n## Settings\n\n";
  out << "- seed: " << s.seed << '\n';
  out << "- permutations: " << s.n_permutations << '\n';
  out << "- flag rule: "
      << (s.rule == FlagRule::Quantile95 ? "value above the 95th percentile of the null" : "value above the null mean")
      << '\n';
  out << "- history: "
      << (s.history ? history_label(*s.history) : "hidden states when recorded, else window:" + std::to_string(kDefaultWindow))
      << '\n';
  out << "- neighbors: " << s.k_neighbors << '\n';
  out << "- sample cap: " << s.sample_cap << '\n';
  out << "- units: nats\n";
  out << "- hidden states are assumed to be recorded after the observation and before the action\n";
  return out.str();
}

}  // namespace

std::string verdict_json(const ScenarioVerdict& v, const ReportContext& ctx) {
  return verdict_object(v, ctx).dump(2) + "\n";
}

std::string emit_report(std::span<const ScenarioVerdict> verdicts, ReportFormat format, const ReportContext& ctx) {
  if (verdicts.empty()) throw ConfigError("no verdicts to report");
  if (format == ReportFormat::Markdown) return markdown_report(verdicts, ctx);
  ordered_json j;
  j["settings"] = settings_json(ctx.settings);
  ordered_json all = ordered_json::array();
  for (const auto& v : verdicts) all.push_back(verdict_object(v, ctx));
  j["scenarios"] = std::move(all);
  ordered_json failures = ordered_json::array();
  for (const auto& [name, msg] : ctx.failures) failures.push_back({{"scenario", name}, {"error", msg}});
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

}  // namespace marlaudit
