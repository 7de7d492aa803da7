#include "marlaudit/trajectory.hpp"

#include <cmath>
#include <string>

#include "marlaudit/errors.hpp"

namespace marlaudit {

namespace {

std::string where(std::int64_t episode, std::size_t agent, std::size_t t) {
  return "episode " + std::to_string(episode) + " agent " + std::to_string(agent) + " t " + std::to_string(t) + ": ";
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::size_t TrajectoryDataset::total_steps() const {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.length();
  return n;
}

void validate_manifest(const Manifest& m) {
  if (m.num_agents < 2) throw ValidationError("manifest: num_agents must be >= 2");
  if (m.agents.size() != static_cast<std::size_t>(m.num_agents))
    throw ValidationError("manifest: agents array has " + std::to_string(m.agents.size()) + " entries, num_agents is " +
                          std::to_string(m.num_agents));
  if (!(m.checkpoint_fraction >= 0.0 && m.checkpoint_fraction <= 1.0))
    throw ValidationError("manifest: checkpoint_fraction must lie in [0, 1]");
  for (std::size_t i = 0; i < m.agents.size(); ++i) {
    const auto& a = m.agents[i];
    const std::string who = "manifest: agent " + std::to_string(i) + ": ";
    if (a.obs_dim < 1) throw ValidationError(who + "obs_dim must be positive");
    if (a.hidden_dim < 0) throw ValidationError(who + "hidden_dim must be nonnegative");
    if (const auto* d = std::get_if<DiscreteSpace>(&a.action_space)) {
      if (d->n < 1) throw ValidationError(who + "discrete action space needs n >= 1");
    } else if (std::get<ContinuousSpace>(a.action_space).dim < 1) {
      throw ValidationError(who + "continuous action space needs dim >= 1");
    }
  }
}

void validate_dataset(const TrajectoryDataset& d) {
  validate_manifest(d.manifest);
  if (d.episodes.empty()) throw ValidationError("dataset has no episodes");
  const std::size_t na = d.num_agents();
  for (const auto& ep : d.episodes) {
    if (ep.agents.size() != na)
      throw ValidationError("episode " + std::to_string(ep.episode_id) + ": has " + std::to_string(ep.agents.size()) +
                            " agents, manifest declares " + std::to_string(na));
    const std::size_t T = ep.agents[0].size();
    if (T == 0) throw ValidationError("episode " + std::to_string(ep.episode_id) + ": empty episode");
    for (std::size_t i = 0; i < na; ++i) {
      if (ep.agents[i].size() != T)
        throw ValidationError("episode " + std::to_string(ep.episode_id) + " agent " + std::to_string(i) +
                              ": episode length mismatch (" + std::to_string(ep.agents[i].size()) + " vs " +
                              std::to_string(T) + ")");
      const auto& spec = d.manifest.agents[i];
      for (std::size_t t = 0; t < T; ++t) {
        const auto& s = ep.agents[i][t];
        if (s.t != static_cast<std::int64_t>(t))
          throw ValidationError(where(ep.episode_id, i, t) + "timesteps must run 0..T-1 without gaps (found t=" +
                                std::to_string(s.t) + ")");
        if (s.obs.size() != static_cast<std::size_t>(spec.obs_dim))
          throw ValidationError(where(ep.episode_id, i, t) + "obs has length " + std::to_string(s.obs.size()) +
                                ", expected " + std::to_string(spec.obs_dim));
        if (!all_finite(s.obs)) throw ValidationError(where(ep.episode_id, i, t) + "non-finite observation");
        if (const auto* ds = std::get_if<DiscreteSpace>(&spec.action_space)) {
          const auto* a = std::get_if<std::int64_t>(&s.action);
          if (!a) throw ValidationError(where(ep.episode_id, i, t) + "expected a discrete action index");
          if (*a < 0 || *a >= ds->n)
            throw ValidationError(where(ep.episode_id, i, t) + "action out of range (" + std::to_string(*a) +
                                  " not in [0, " + std::to_string(ds->n) + "))");
        } else {
          const auto* a = std::get_if<std::vector<double>>(&s.action);
          const auto dim = static_cast<std::size_t>(std::get<ContinuousSpace>(spec.action_space).dim);
          if (!a || a->size() != dim)
            throw ValidationError(where(ep.episode_id, i, t) + "expected a continuous action of dim " +
                                  std::to_string(dim));
          if (!all_finite(*a)) throw ValidationError(where(ep.episode_id, i, t) + "non-finite action");
        }
        const auto hd = static_cast<std::size_t>(spec.hidden_dim);
        if (s.hidden.size() != hd)
          throw ValidationError(where(ep.episode_id, i, t) + (hd == 0 ? "hidden state given but hidden_dim is 0"
                                                                      : "hidden state missing or of wrong length"));
        if (!all_finite(s.hidden)) throw ValidationError(where(ep.episode_id, i, t) + "non-finite hidden state");
      }
    }
  }
}

}  // namespace marlaudit
