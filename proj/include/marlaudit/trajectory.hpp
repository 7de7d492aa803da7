#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace marlaudit {

struct DiscreteSpace {
  int n = 0;  // number of actions
  bool operator==(const DiscreteSpace&) const = default;
};

struct ContinuousSpace {
  int dim = 0;
  bool operator==(const ContinuousSpace&) const = default;
};

using ActionSpace = std::variant<DiscreteSpace, ContinuousSpace>;

inline bool is_discrete(const ActionSpace& s) { return std::holds_alternative<DiscreteSpace>(s); }

// Width of an action inside a window payload: one-hot for discrete, raw for continuous.
inline std::size_t action_encoding_dim(const ActionSpace& s) {
  if (const auto* d = std::get_if<DiscreteSpace>(&s)) return static_cast<std::size_t>(d->n);
  return static_cast<std::size_t>(std::get<ContinuousSpace>(s).dim);
}

struct AgentSpec {
  ActionSpace action_space = DiscreteSpace{2};
  int obs_dim = 1;
  int hidden_dim = 0;  // 0: no hidden states recorded
  bool operator==(const AgentSpec&) const = default;
};

struct Manifest {
  std::string scenario;
  std::string algorithm;     // free-form, e.g. "IPPO" / "MAPPO"
  std::string architecture;  // free-form, e.g. "FF" / "RNN"
  std::int64_t seed = 0;
  int num_agents = 0;
  std::vector<AgentSpec> agents;
  double checkpoint_fraction = 1.0;
  bool operator==(const Manifest&) const = default;
};

// Discrete index or continuous vector, matching the agent's ActionSpace.
using Action = std::variant<std::int64_t, std::vector<double>>;

struct StepRecord {
  std::int64_t t = 0;
  std::vector<double> obs;
  Action action = std::int64_t{0};
  std::vector<double> hidden;  // empty iff hidden_dim == 0
  bool operator==(const StepRecord&) const = default;
};

struct Episode {
  std::int64_t episode_id = 0;
  std::vector<std::vector<StepRecord>> agents;  // agents[i][t]

  std::size_t length() const { return agents.empty() ? 0 : agents.front().size(); }
  bool operator==(const Episode&) const = default;
};

struct TrajectoryDataset {
  Manifest manifest;
  std::vector<Episode> episodes;

  std::size_t num_agents() const { return static_cast<std::size_t>(manifest.num_agents); }
  const AgentSpec& agent(std::size_t i) const { return manifest.agents.at(i); }
  // Total number of pooled (episode, t) tuples.
  std::size_t total_steps() const;
  bool operator==(const TrajectoryDataset&) const = default;
};

// Throws ValidationError naming the offending field or episode/agent/t.
void validate_manifest(const Manifest& m);
void validate_dataset(const TrajectoryDataset& d);

}  // namespace marlaudit
