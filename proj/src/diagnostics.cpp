#include "marlaudit/diagnostics.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "marlaudit/errors.hpp"
#include "marlaudit/parallel.hpp"
#include "marlaudit/rng.hpp"

namespace marlaudit {

namespace {

struct Tuple {
  std::size_t episode;
  std::size_t t;
};

// Keeps at most `cap` items, chosen uniformly without replacement; order is preserved.
template <typename T>
std::vector<T> cap_rows(std::vector<T> rows, std::size_t cap, std::uint64_t seed, std::uint64_t stream) {
  if (cap == 0 || rows.size() <= cap) return rows;
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, {0x5a3c, stream});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<T> out;
  out.reserve(cap);
  for (auto i : idx) out.push_back(rows[i]);
  return out;
}

std::vector<Tuple> pooled_tuples(const TrajectoryDataset& d, const DiagnosticConfig& cfg) {
  std::vector<Tuple> rows;
  rows.reserve(d.total_steps());
  for (std::size_t e = 0; e < d.episodes.size(); ++e)
    for (std::size_t t = 0; t < d.episodes[e].length(); ++t) rows.push_back({e, t});
  return cap_rows(std::move(rows), cfg.sample_cap, cfg.seed, 0);
}

// Row-wise feature assembly for a list of (episode, t) tuples.
class RowBuilder {
 public:
  RowBuilder(const TrajectoryDataset& d, std::span<const Tuple> rows, HistoryMode mode)
      : d_(d), rows_(rows), mode_(mode) {}

  enum class Part { Obs, Action, History, Trajectory };

  SampleColumn column(std::initializer_list<std::pair<Part, std::size_t>> parts) const {
    std::vector<double> values;
    std::size_t width = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const std::size_t before = values.size();
      for (const auto& [part, agent] : parts) append(part, agent, rows_[r], values);
      if (r == 0) width = values.size() - before;
    }
    return SampleColumn::from_rows(std::move(values), width);
  }

  SampleColumn actions(std::size_t agent) const {
    const auto& space = d_.agent(agent).action_space;
    if (is_discrete(space)) {
      std::vector<std::int64_t> labels;
      labels.reserve(rows_.size());
      for (const auto& r : rows_)
        labels.push_back(std::get<std::int64_t>(d_.episodes[r.episode].agents[agent][r.t].action));
      return SampleColumn::discrete(std::move(labels));
    }
    std::vector<double> values;
    for (const auto& r : rows_) {
      const auto& a = std::get<std::vector<double>>(d_.episodes[r.episode].agents[agent][r.t].action);
      values.insert(values.end(), a.begin(), a.end());
    }
    return SampleColumn::continuous(std::move(values), action_encoding_dim(space));
  }

 private:
  void append(Part part, std::size_t agent, const Tuple& r, std::vector<double>& out) const {
    const auto& ep = d_.episodes[r.episode];
    const auto& spec = d_.agent(agent);
    switch (part) {
      case Part::Obs: {
        const auto& o = ep.agents[agent][r.t].obs;
        out.insert(out.end(), o.begin(), o.end());
        break;
      }
      case Part::Action:
        append_action_encoding(ep.agents[agent][r.t].action, spec.action_space, out);
        break;
      case Part::History:
      case Part::Trajectory: {
        if (mode_.is_hidden()) {
          if (spec.hidden_dim <= 0)
            throw ConfigError("hidden-state history requested for agent " + std::to_string(agent) +
                              ", but the manifest records no hidden states (hidden_dim = 0)");
          const auto& h = ep.agents[agent][r.t].hidden;
          out.insert(out.end(), h.begin(), h.end());
        } else {
          append_window(ep, spec, agent, r.t, mode_.window,
                        part == Part::History ? WindowContent::ObservationsOnly : WindowContent::ObservationsAndActions,
                        out);
        }
        break;
      }
    }
  }

  const TrajectoryDataset& d_;
  std::span<const Tuple> rows_;
  HistoryMode mode_;
};

using Part = RowBuilder::Part;

void check_agent(const TrajectoryDataset& d, std::size_t i) {
  if (i >= d.num_agents())
    throw ConfigError("agent index " + std::to_string(i) + " out of range (num_agents = " +
                      std::to_string(d.num_agents()) + ")");
}

void check_pair(const TrajectoryDataset& d, Subject s) {
  check_agent(d, s.source);
  if (!s.target) throw ConfigError("pair metric needs an ordered pair of agents");
  check_agent(d, *s.target);
  if (s.source == *s.target) throw ConfigError("pair metric needs two distinct agents (i = j)");
}

KnnOptions knn(const DiagnosticConfig& cfg) { return {cfg.k_neighbors, cfg.seed}; }

std::optional<double> normalize(double raw, double den) {
  if (den > kDenominatorEpsilon) return raw / den;
  return std::nullopt;
}

DiagnosticResult finish(MetricId m, Subject s, EstimateNats raw, EstimateNats den, HistoryMode mode) {
  DiagnosticResult r;
  r.metric = m;
  r.subject = s;
  r.normalized = normalize(raw.value, den.value);
  r.raw = std::move(raw);
  r.denominator = std::move(den);
  r.history = history_label(mode);
  return r;
}

}  // namespace

std::string_view metric_name(MetricId m) {
  switch (m) {
    case MetricId::OAR: return "OAR";
    case MetricId::HAR: return "HAR";
    case MetricId::PIF: return "PIF";
    case MetricId::AA: return "AA";
    case MetricId::DAI: return "DAI";
  }
  return "?";
}

MetricId parse_metric(std::string_view name) {
  for (auto m : kAllMetrics)
    if (metric_name(m) == name) return m;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::string Subject::label() const {
  return target ? std::to_string(source) + "->" + std::to_string(*target) : std::to_string(source);
}

std::string history_label(HistoryMode m) {
  return m.is_hidden() ? "hidden" : "window:" + std::to_string(m.window);
}

HistoryMode parse_history(std::string_view text) {
  if (text == "hidden") return HistoryMode::hidden();
  constexpr std::string_view prefix = "window:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto num = text.substr(prefix.size());
    std::size_t k = 0;
    if (num.empty() || num.find_first_not_of("0123456789") != std::string_view::npos)
      throw ConfigError("bad history mode '" + std::string(text) + "'");
    k = std::stoul(std::string(num));
    if (k == 0) throw ConfigError("window history needs k >= 1");
    return HistoryMode::window_of(k);
  }
  throw ConfigError("bad history mode '" + std::string(text) + "' (expected hidden or window:K)");
}

HistoryMode resolve_history(const TrajectoryDataset& d, const DiagnosticConfig& cfg) {
  if (cfg.k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
  if (cfg.history) {
    if (cfg.history->is_hidden()) {
      for (std::size_t i = 0; i < d.num_agents(); ++i)
        if (d.agent(i).hidden_dim <= 0)
          throw ConfigError("hidden-state history requested, but agent " + std::to_string(i) +
                            " has no recorded hidden states (hidden_dim = 0)");
    } else if (cfg.history->window == 0) {
      throw ConfigError("window history needs k >= 1");
    }
    return *cfg.history;
  }
  const bool all_hidden = std::all_of(d.manifest.agents.begin(), d.manifest.agents.end(),
                                      [](const AgentSpec& a) { return a.hidden_dim > 0; });
  return all_hidden ? HistoryMode::hidden() : HistoryMode::window_of(kDefaultWindow);
}

std::vector<Subject> subjects_for(const TrajectoryDataset& d, MetricId m) {
  std::vector<Subject> out;
  const std::size_t n = d.num_agents();
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_pair_metric(m)) {
      out.push_back(Subject::agent(i));
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.push_back(Subject::pair(i, j));
  }
  return out;
}

MetricColumns metric_columns(const TrajectoryDataset& d, MetricId m, Subject s, const DiagnosticConfig& cfg) {
  const HistoryMode mode = resolve_history(d, cfg);
  const auto rows = pooled_tuples(d, cfg);
  const RowBuilder b(d, rows, mode);
  const std::size_t i = s.source;
  switch (m) {
    case MetricId::OAR:
      check_agent(d, i);
      return {b.column({{Part::Obs, i}}), b.actions(i), std::nullopt};
    case MetricId::HAR:
      check_agent(d, i);
      return {b.column({{Part::History, i}}), b.actions(i), b.column({{Part::Obs, i}})};
    case MetricId::PIF: {
      check_pair(d, s);
      const std::size_t j = *s.target;
      return {b.column({{Part::Trajectory, i}, {Part::Obs, i}}), b.actions(j),
              b.column({{Part::Trajectory, j}, {Part::Obs, j}})};
    }
    case MetricId::AA: {
      check_pair(d, s);
      const std::size_t j = *s.target;
      return {b.actions(i), b.actions(j), b.column({{Part::Obs, i}, {Part::Obs, j}})};
    }
    case MetricId::DAI:
      throw ConfigError("DAI is estimated per timestep; use dai_columns_at");
  }
  throw ConfigError("unknown metric");
}

MetricColumns dai_columns_at(const TrajectoryDataset& d, Subject s, std::size_t t, const DiagnosticConfig& cfg) {
  check_pair(d, s);
  if (t == 0) throw ConfigError("DAI terms start at t = 1");
  const HistoryMode mode = resolve_history(d, cfg);
  std::vector<Tuple> rows;
  for (std::size_t e = 0; e < d.episodes.size(); ++e)
    if (d.episodes[e].length() > t) rows.push_back({e, t});
  rows = cap_rows(std::move(rows), cfg.sample_cap, cfg.seed, 1 + t);
  const RowBuilder b(d, rows, mode);
  // The trajectory window at row t covers steps t-k..t-1: tau_{t-1}, ending at A_{t-1}.
  return {b.column({{Part::Trajectory, s.source}}), b.actions(*s.target), b.column({{Part::Trajectory, *s.target}})};
}

DiagnosticResult compute_oar(const TrajectoryDataset& d, std::size_t agent, const DiagnosticConfig& cfg) {
  const auto cols = metric_columns(d, MetricId::OAR, Subject::agent(agent), cfg);
  return finish(MetricId::OAR, Subject::agent(agent), mutual_information(cols.source, cols.target, knn(cfg)),
                entropy(cols.target, knn(cfg)), resolve_history(d, cfg));
}

namespace {

DiagnosticResult conditional_metric(const TrajectoryDataset& d, MetricId m, Subject s, const DiagnosticConfig& cfg) {
  const auto cols = metric_columns(d, m, s, cfg);
  return finish(m, s, conditional_mutual_information(cols.source, cols.target, *cols.conditioner, knn(cfg)),
                cond_entropy(cols.target, *cols.conditioner, knn(cfg)), resolve_history(d, cfg));
}

}  // namespace

DiagnosticResult compute_har(const TrajectoryDataset& d, std::size_t agent, const DiagnosticConfig& cfg) {
  return conditional_metric(d, MetricId::HAR, Subject::agent(agent), cfg);
}

DiagnosticResult compute_pif(const TrajectoryDataset& d, std::size_t i, std::size_t j, const DiagnosticConfig& cfg) {
  return conditional_metric(d, MetricId::PIF, Subject::pair(i, j), cfg);
}

DiagnosticResult compute_aa(const TrajectoryDataset& d, std::size_t i, std::size_t j, const DiagnosticConfig& cfg) {
  return conditional_metric(d, MetricId::AA, Subject::pair(i, j), cfg);
}

DiagnosticResult compute_dai(const TrajectoryDataset& d, std::size_t i, std::size_t j, const DiagnosticConfig& cfg) {
  const Subject s = Subject::pair(i, j);
  check_pair(d, s);
  const HistoryMode mode = resolve_history(d, cfg);
  std::size_t horizon = 0;
  for (const auto& ep : d.episodes) horizon = std::max(horizon, ep.length());
  if (horizon < 2) throw EstimationError("DAI: episodes too short (need T >= 2 for cross-timestep terms)");

  const std::size_t min_rows = 5 * static_cast<std::size_t>(cfg.k_neighbors);
  std::vector<TimestepTerm> terms;
  std::vector<std::size_t> skipped;
  std::string raw_id, den_id;
  for (std::size_t t = 1; t < horizon; ++t) {
    const auto cols = dai_columns_at(d, s, t, cfg);
    if (cols.target.size() < min_rows) {
      skipped.push_back(t);
      continue;
    }
    const auto cmi = conditional_mutual_information(cols.source, cols.target, *cols.conditioner, knn(cfg));
    const auto h = cond_entropy(cols.target, *cols.conditioner, knn(cfg));
    raw_id = cmi.estimator_id;
    den_id = h.estimator_id;
    terms.push_back({t, cols.target.size(), cmi.value, h.value});
  }
  if (terms.empty())
    throw EstimationError("DAI: episodes too short, no timestep has " + std::to_string(min_rows) + " episodes");

  EstimateNats raw{0.0, 0, raw_id, 0, {}}, den{0.0, 0, den_id, 0, {}};
  for (const auto& term : terms) {
    raw.value += term.cmi;
    den.value += term.cond_entropy;
    raw.n_samples += term.n_samples;
  }
  raw.value /= static_cast<double>(terms.size());
  den.value /= static_cast<double>(terms.size());
  den.n_samples = raw.n_samples;
  const bool knn_based = raw_id.rfind("plugin", 0) != 0;
  raw.k_neighbors = knn_based ? cfg.k_neighbors : 0;
  den.k_neighbors = den_id.rfind("plugin", 0) != 0 ? cfg.k_neighbors : 0;

  auto r = finish(MetricId::DAI, s, std::move(raw), std::move(den), mode);
  r.timesteps = std::move(terms);
  r.skipped_timesteps = std::move(skipped);
  return r;
}

DiagnosticResult compute_metric(const TrajectoryDataset& d, MetricId m, Subject s, const DiagnosticConfig& cfg) {
  switch (m) {
    case MetricId::OAR: return compute_oar(d, s.source, cfg);
    case MetricId::HAR: return compute_har(d, s.source, cfg);
    case MetricId::PIF: check_pair(d, s); return compute_pif(d, s.source, *s.target, cfg);
    case MetricId::AA: check_pair(d, s); return compute_aa(d, s.source, *s.target, cfg);
    case MetricId::DAI: check_pair(d, s); return compute_dai(d, s.source, *s.target, cfg);
  }
  throw ConfigError("unknown metric");
}

std::vector<DiagnosticResult> compute_all(const TrajectoryDataset& d, const DiagnosticConfig& cfg, unsigned jobs) {
  const HistoryMode mode = resolve_history(d, cfg);
  std::vector<std::pair<MetricId, Subject>> tasks;
  for (auto m : kAllMetrics)
    for (const auto& s : subjects_for(d, m)) tasks.emplace_back(m, s);
  std::vector<DiagnosticResult> out(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t k) {
    const auto [m, s] = tasks[k];
    try {
      out[k] = compute_metric(d, m, s, cfg);
    } catch (const EstimationError& e) {
      DiagnosticResult r;
      r.metric = m;
      r.subject = s;
      r.history = history_label(mode);
      r.skipped = e.what();
      out[k] = std::move(r);
    }
  });
  return out;
}

}  // namespace marlaudit
