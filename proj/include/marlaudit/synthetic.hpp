#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marlaudit/diagnostics.hpp"
#include "marlaudit/sample_column.hpp"
#include "marlaudit/trajectory.hpp"

namespace marlaudit {

enum class PlantedKind { ReactiveCopy, MemoryCopy, PrivateGoal, ConventionPair, LaggedFollower, Independent };

inline constexpr PlantedKind kAllPlantedKinds[] = {PlantedKind::ReactiveCopy,   PlantedKind::MemoryCopy,
                                                   PlantedKind::PrivateGoal,    PlantedKind::ConventionPair,
                                                   PlantedKind::LaggedFollower, PlantedKind::Independent};

std::string_view planted_name(PlantedKind k);  // kebab-case, e.g. "lagged-follower"
PlantedKind parse_planted(std::string_view name);

// Agents 0 and 1 carry the planted structure; any further agents observe 0
// and always play action 0. Observations have one feature; actions are
// Discrete(arity). Draws are uniform over the arity ("fair").
//   reactive-copy    O0 iid, A0 = O0; agent 1 inert
//   memory-copy      O0 iid, A0_t = O0_{t-lag} (0 before the start); agent 1 inert
//   private-goal     O0 iid, A0 = O0; O1 = 0, A1_t = O0_t
//   convention-pair  observations 0; C_t iid, A0 = A1 = C_t
//   lagged-follower  observations 0; A0 iid, A1_t = A0_{t-lag} (0 before the start)
//   independent      every observation and action iid
struct PlantedScenario {
  PlantedKind kind = PlantedKind::Independent;
  std::size_t lag = 1;
  std::size_t n_episodes = 500;
  std::size_t T = 20;
  std::uint64_t seed = 0;
  std::size_t num_agents = 2;
  int arity = 2;
  std::string architecture = "RNN";
  std::string algorithm = "IPPO";
};

// Throws ConfigError for T <= lag, zero episodes, fewer than 2 agents or arity < 2.
TrajectoryDataset generate(const PlantedScenario& s);

// Designed flag per metric (OAR, HAR, PIF, AA, DAI order of kAllMetrics)
// under the mean-exceedance rule with the default window history.
// nullopt marks a metric whose permuted and original data are exchangeable,
// so its flag is a coin flip.
std::array<std::optional<bool>, 5> expected_flags(PlantedKind k);

// Dense joint probability table, last variable varying fastest.
struct JointPmf {
  std::vector<int> arities;
  std::vector<double> p;

  std::size_t size() const;
  void validate() const;  // nonnegative, sums to 1 within 1e-12
};

inline constexpr std::size_t kMaxJointCells = 1'000'000;

// I(X; Y | Z) in nats by summation over the table (Z may be empty).
double exact_mi(const JointPmf& pmf, std::span<const std::size_t> xs, std::span<const std::size_t> ys,
                std::span<const std::size_t> zs = {});
double exact_entropy(const JointPmf& pmf, std::span<const std::size_t> xs);

// A discrete variable read off a dataset at each pooled (episode, t). `lag`
// reads step t-lag; tuples with t < max lag are dropped.
struct VariableSelector {
  enum class Source { Observation, Action };
  Source source = Source::Observation;
  std::size_t agent = 0;
  std::size_t feature = 0;
  std::size_t lag = 0;

  static VariableSelector obs(std::size_t agent, std::size_t feature = 0, std::size_t lag = 0) {
    return {Source::Observation, agent, feature, lag};
  }
  static VariableSelector action(std::size_t agent, std::size_t lag = 0) { return {Source::Action, agent, 0, lag}; }
};

// Normalized count table of the selected variables. Observation features
// must be small nonnegative integers; continuous action spaces are rejected.
JointPmf empirical_joint(const TrajectoryDataset& d, std::span<const VariableSelector> vars);
// Same for paired discrete columns; labels are densely recoded first.
JointPmf empirical_joint(std::span<const SampleColumn> columns);

}  // namespace marlaudit
