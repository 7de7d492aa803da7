#include "marlaudit/synthetic.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "marlaudit/errors.hpp"
#include "marlaudit/rng.hpp"

namespace marlaudit {

std::string_view planted_name(PlantedKind k) {
  switch (k) {
    case PlantedKind::ReactiveCopy: return "reactive-copy";
    case PlantedKind::MemoryCopy: return "memory-copy";
    case PlantedKind::PrivateGoal: return "private-goal";
    case PlantedKind::ConventionPair: return "convention-pair";
    case PlantedKind::LaggedFollower: return "lagged-follower";
    case PlantedKind::Independent: return "independent";
  }
  return "?";
}

PlantedKind parse_planted(std::string_view name) {
  for (auto k : kAllPlantedKinds)
    if (planted_name(k) == name) return k;
  throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

TrajectoryDataset generate(const PlantedScenario& s) {
  if (s.n_episodes == 0) throw ConfigError("need at least one episode");
  if (s.num_agents < 2) throw ConfigError("need at least 2 agents");
  if (s.arity < 2) throw ConfigError("arity must be >= 2");
  if (s.lag < 1) throw ConfigError("lag must be >= 1");
  if (s.T <= s.lag) throw ConfigError("T must exceed lag (T = " + std::to_string(s.T) + ", lag = " +
                                      std::to_string(s.lag) + ")");

  TrajectoryDataset d;
  auto& m = d.manifest;
  m.scenario = std::string(planted_name(s.kind));
  m.algorithm = s.algorithm;
  m.architecture = s.architecture;
  m.seed = static_cast<std::int64_t>(s.seed);
  m.num_agents = static_cast<int>(s.num_agents);
  m.checkpoint_fraction = 1.0;
  m.agents.assign(s.num_agents, AgentSpec{DiscreteSpace{s.arity}, 1, 0});

  const std::size_t T = s.T;
  d.episodes.reserve(s.n_episodes);
  for (std::size_t e = 0; e < s.n_episodes; ++e) {
    Rng rng = make_rng(s.seed, {0x9a17, e});
    std::uniform_int_distribution<std::int64_t> draw(0, s.arity - 1);
    auto fair = [&] {
      std::vector<std::int64_t> v(T);
      for (auto& x : v) x = draw(rng);
      return v;
    };
    auto lagged = [&](const std::vector<std::int64_t>& v) {
      std::vector<std::int64_t> out(T, 0);
      for (std::size_t t = s.lag; t < T; ++t) out[t] = v[t - s.lag];
      return out;
    };
    const std::vector<std::int64_t> zero(T, 0);
    std::vector<std::int64_t> o0 = zero, o1 = zero, a0 = zero, a1 = zero;
    switch (s.kind) {
      case PlantedKind::ReactiveCopy:
        o0 = fair();
        a0 = o0;
        break;
      case PlantedKind::MemoryCopy:
        o0 = fair();
        a0 = lagged(o0);
        break;
      case PlantedKind::PrivateGoal:
        o0 = fair();
        a0 = o0;
        a1 = o0;
        break;
      case PlantedKind::ConventionPair:
        a0 = fair();
        a1 = a0;
        break;
      case PlantedKind::LaggedFollower:
        a0 = fair();
        a1 = lagged(a0);
        break;
      case PlantedKind::Independent:
        o0 = fair();
        a0 = fair();
        o1 = fair();
        a1 = fair();
        break;
    }

    Episode ep;
    ep.episode_id = static_cast<std::int64_t>(e);
    ep.agents.assign(s.num_agents, std::vector<StepRecord>(T));
    for (std::size_t i = 0; i < s.num_agents; ++i) {
      for (std::size_t t = 0; t < T; ++t) {
        std::int64_t o = 0, a = 0;
        if (i == 0) o = o0[t], a = a0[t];
        if (i == 1) o = o1[t], a = a1[t];
        if (i >= 2 && s.kind == PlantedKind::Independent) o = draw(rng), a = draw(rng);
        ep.agents[i][t] = StepRecord{static_cast<std::int64_t>(t), {static_cast<double>(o)}, a, {}};
      }
    }
    d.episodes.push_back(std::move(ep));
  }
  validate_dataset(d);
  return d;
}

std::array<std::optional<bool>, 5> expected_flags(PlantedKind k) {
  constexpr std::optional<bool> T = true, F = false, U = std::nullopt;
  switch (k) {
    case PlantedKind::ReactiveCopy: return {T, F, F, F, F};
    case PlantedKind::MemoryCopy: return {F, T, F, F, F};
    case PlantedKind::PrivateGoal: return {T, U, T, F, F};
    case PlantedKind::ConventionPair: return {F, U, F, T, F};
    case PlantedKind::LaggedFollower: return {F, T, T, F, T};
    case PlantedKind::Independent: return {F, F, F, F, F};
  }
  return {};
}

std::size_t JointPmf::size() const {
  std::size_t n = 1;
  for (int a : arities) {
    if (a < 1) throw ConfigError("joint pmf arity must be >= 1");
    if (n > kMaxJointCells / static_cast<std::size_t>(a))
      throw ConfigError("joint table exceeds " + std::to_string(kMaxJointCells) + " cells: enumerate smaller");
    n *= static_cast<std::size_t>(a);
  }
  return n;
}

void JointPmf::validate() const {
  if (p.size() != size()) throw ConfigError("joint pmf table size does not match arities");
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw ConfigError("joint pmf entries must be nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("joint pmf does not sum to 1");
}

namespace {

// Marginal over `vars` as a dense table (mixed radix, first var slowest).
std::vector<double> marginal(const JointPmf& pmf, std::span<const std::size_t> vars) {
  const std::size_t nv = pmf.arities.size();
  std::size_t cells = 1;
  for (auto v : vars) cells *= static_cast<std::size_t>(pmf.arities[v]);
  std::vector<double> out(cells, 0.0);
  std::vector<int> digit(nv, 0);
  for (std::size_t c = 0; c < pmf.p.size(); ++c) {
    if (pmf.p[c] != 0.0) {
      std::size_t idx = 0;
      for (auto v : vars) idx = idx * static_cast<std::size_t>(pmf.arities[v]) + static_cast<std::size_t>(digit[v]);
      out[idx] += pmf.p[c];
    }
    for (std::size_t v = nv; v-- > 0;) {
      if (++digit[v] < pmf.arities[v]) break;
      digit[v] = 0;
    }
  }
  return out;
}

double entropy_of(const std::vector<double>& table) {
  double h = 0.0;
  for (double q : table)
    if (q > 0.0) h -= q * std::log(q);
  return h;
}

void check_vars(const JointPmf& pmf, std::span<const std::size_t> vars, std::vector<bool>& used) {
  for (auto v : vars) {
    if (v >= pmf.arities.size()) throw ConfigError("variable index out of range");
    if (used[v]) throw ConfigError("variable sets must be disjoint");
    used[v] = true;
  }
}

std::vector<std::size_t> concat(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

double exact_entropy(const JointPmf& pmf, std::span<const std::size_t> xs) {
  pmf.validate();
  std::vector<bool> used(pmf.arities.size(), false);
  check_vars(pmf, xs, used);
  return entropy_of(marginal(pmf, xs));
}

double exact_mi(const JointPmf& pmf, std::span<const std::size_t> xs, std::span<const std::size_t> ys,
                std::span<const std::size_t> zs) {
  pmf.validate();
  if (xs.empty() || ys.empty()) throw ConfigError("exact_mi needs nonempty x and y variable sets");
  std::vector<bool> used(pmf.arities.size(), false);
  check_vars(pmf, xs, used);
  check_vars(pmf, ys, used);
  check_vars(pmf, zs, used);

  // Direct summation of p(x,y,z) ln[p(x,y,z) p(z) / (p(x,z) p(y,z))].
  const auto xyz_vars = concat(concat(xs, ys), zs);
  const auto xz_vars = concat(xs, zs);
  const auto yz_vars = concat(ys, zs);
  const auto pxyz = marginal(pmf, xyz_vars);
  const auto pxz = marginal(pmf, xz_vars);
  const auto pyz = marginal(pmf, yz_vars);
  const auto pz = marginal(pmf, zs);

  std::size_t nx = 1, ny = 1, nz = 1;
  for (auto v : xs) nx *= static_cast<std::size_t>(pmf.arities[v]);
  for (auto v : ys) ny *= static_cast<std::size_t>(pmf.arities[v]);
  for (auto v : zs) nz *= static_cast<std::size_t>(pmf.arities[v]);

  double total = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) {
        const double q = pxyz[(x * ny + y) * nz + z];
        if (q <= 0.0) continue;
        total += q * std::log(q * pz[z] / (pxz[x * nz + z] * pyz[y * nz + z]));
      }
  return std::max(total, 0.0);
}

namespace {

JointPmf from_rows(const std::vector<std::vector<std::int64_t>>& rows, std::size_t n_vars) {
  if (rows.empty()) throw ConfigError("empirical joint over an empty selection");
  JointPmf pmf;
  pmf.arities.assign(n_vars, 1);
  for (const auto& r : rows)
    for (std::size_t v = 0; v < n_vars; ++v) pmf.arities[v] = std::max(pmf.arities[v], static_cast<int>(r[v]) + 1);
  pmf.p.assign(pmf.size(), 0.0);
  std::vector<std::size_t> counts(pmf.p.size(), 0);
  for (const auto& r : rows) {
    std::size_t idx = 0;
    for (std::size_t v = 0; v < n_vars; ++v) idx = idx * static_cast<std::size_t>(pmf.arities[v]) + static_cast<std::size_t>(r[v]);
    ++counts[idx];
  }
  const auto n = static_cast<double>(rows.size());
  for (std::size_t c = 0; c < counts.size(); ++c) pmf.p[c] = static_cast<double>(counts[c]) / n;
  return pmf;
}

}  // namespace

JointPmf empirical_joint(const TrajectoryDataset& d, std::span<const VariableSelector> vars) {
  if (vars.empty()) throw ConfigError("empirical joint needs at least one variable");
  std::size_t max_lag = 0;
  for (const auto& v : vars) {
    if (v.agent >= d.num_agents()) throw ConfigError("selector agent out of range");
    const auto& spec = d.agent(v.agent);
    if (v.source == VariableSelector::Source::Action && !is_discrete(spec.action_space))
      throw ConfigError("empirical joint: continuous selector (agent " + std::to_string(v.agent) + " action)");
    if (v.source == VariableSelector::Source::Observation && v.feature >= static_cast<std::size_t>(spec.obs_dim))
      throw ConfigError("selector feature out of range");
    max_lag = std::max(max_lag, v.lag);
  }
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& ep : d.episodes) {
    for (std::size_t t = max_lag; t < ep.length(); ++t) {
      std::vector<std::int64_t> row;
      row.reserve(vars.size());
      for (const auto& v : vars) {
        const auto& step = ep.agents[v.agent][t - v.lag];
        if (v.source == VariableSelector::Source::Action) {
          row.push_back(std::get<std::int64_t>(step.action));
          continue;
        }
        const double x = step.obs[v.feature];
        if (x < 0 || x != std::floor(x) || x > 1e6)
          throw ConfigError("empirical joint: continuous selector (agent " + std::to_string(v.agent) +
                            " observation feature " + std::to_string(v.feature) + ")");
        row.push_back(static_cast<std::int64_t>(x));
      }
      rows.push_back(std::move(row));
    }
  }
  return from_rows(rows, vars.size());
}

JointPmf empirical_joint(std::span<const SampleColumn> columns) {
  if (columns.empty()) throw ConfigError("empirical joint needs at least one column");
  const std::size_t n = columns.front().size();
  std::vector<std::vector<std::int64_t>> dense;
  for (const auto& c : columns) {
    if (!c.is_discrete()) throw ConfigError("empirical joint: continuous selector");
    if (c.size() != n) throw ConfigError("empirical joint: columns differ in length");
    dense.push_back(dense_labels(c.labels()));
  }
  std::vector<std::vector<std::int64_t>> rows(n, std::vector<std::int64_t>(columns.size()));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t v = 0; v < columns.size(); ++v) rows[r][v] = dense[v][r];
  return from_rows(rows, columns.size());
}

}  // namespace marlaudit
