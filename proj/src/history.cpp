#include "marlaudit/history.hpp"

#include <stdexcept>
#include <string>

#include "marlaudit/errors.hpp"

namespace marlaudit {

std::size_t window_step_width(const AgentSpec& spec, WindowContent content) {
  const std::size_t act = content == WindowContent::ObservationsAndActions ? action_encoding_dim(spec.action_space) : 0;
  return static_cast<std::size_t>(spec.obs_dim) + act + 1;
}

void append_action_encoding(const Action& a, const ActionSpace& space, std::vector<double>& out) {
  if (const auto* d = std::get_if<DiscreteSpace>(&space)) {
    const auto idx = std::get<std::int64_t>(a);
    for (int k = 0; k < d->n; ++k) out.push_back(k == idx ? 1.0 : 0.0);
  } else {
    const auto& v = std::get<std::vector<double>>(a);
    out.insert(out.end(), v.begin(), v.end());
  }
}

void append_window(const Episode& episode, const AgentSpec& spec, std::size_t agent, std::size_t t, std::size_t k,
                   WindowContent content, std::vector<double>& out) {
  const auto& steps = episode.agents.at(agent);
  const std::size_t width = window_step_width(spec, content);
  for (std::size_t slot = 0; slot < k; ++slot) {
    // Slot 0 is step t-k, the last slot is step t-1.
    if (t + slot < k) {
      out.insert(out.end(), width, 0.0);
      continue;
    }
    const auto& s = steps[t + slot - k];
    out.insert(out.end(), s.obs.begin(), s.obs.end());
    if (content == WindowContent::ObservationsAndActions) append_action_encoding(s.action, spec.action_space, out);
    out.push_back(1.0);
  }
}

HistoryRepresentation build_history(const Episode& episode, const AgentSpec& spec, std::size_t agent, std::size_t t,
                                    HistoryMode mode, WindowContent content) {
  if (agent >= episode.agents.size()) throw std::out_of_range("build_history: agent index out of range");
  const auto& steps = episode.agents[agent];
  if (t >= steps.size())
    throw std::out_of_range("build_history: t=" + std::to_string(t) + " beyond episode length " +
                            std::to_string(steps.size()));
  HistoryRepresentation h{mode, {}};
  if (mode.is_hidden()) {
    if (spec.hidden_dim <= 0)
      throw ConfigError("hidden-state history requested for agent " + std::to_string(agent) +
                        ", but the manifest records no hidden states (hidden_dim = 0)");
    h.payload = steps[t].hidden;
    return h;
  }
  if (mode.window == 0) throw ConfigError("window history needs k >= 1");
  h.payload.reserve(mode.window * window_step_width(spec, content));
  append_window(episode, spec, agent, t, mode.window, content, h.payload);
  return h;
}

}  // namespace marlaudit
