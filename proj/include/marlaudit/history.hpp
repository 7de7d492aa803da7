#pragma once

#include <cstddef>
#include <vector>

#include "marlaudit/trajectory.hpp"

namespace marlaudit {

inline constexpr std::size_t kDefaultWindow = 4;

struct HistoryMode {
  enum class Kind { HiddenState, Window };
  Kind kind = Kind::Window;
  std::size_t window = kDefaultWindow;

  static HistoryMode hidden() { return {Kind::HiddenState, 0}; }
  static HistoryMode window_of(std::size_t k) { return {Kind::Window, k}; }
  bool is_hidden() const { return kind == Kind::HiddenState; }
  bool operator==(const HistoryMode&) const = default;
};

// Which channels a window carries per past step. ObservationsOnly is the
// reactive history H_t (HAR); ObservationsAndActions is the trajectory tau_{t-1}.
enum class WindowContent { ObservationsOnly, ObservationsAndActions };

struct HistoryRepresentation {
  HistoryMode mode;
  std::vector<double> payload;
};

// Per-step slot width of a window payload for agent `spec`.
std::size_t window_step_width(const AgentSpec& spec, WindowContent content);

// History of `agent` at time t. Window payloads cover steps t-k..t-1 in
// chronological order, each slot laid out as [obs | action encoding | mask];
// steps before the episode start are all zeros with mask 0. O_t and A_t are
// never included. HiddenState returns the hidden vector recorded at t.
// Throws ConfigError for HiddenState on an agent without hidden states or
// for a zero-length window, std::out_of_range for bad agent/t.
HistoryRepresentation build_history(const Episode& episode, const AgentSpec& spec, std::size_t agent,
                                    std::size_t t, HistoryMode mode,
                                    WindowContent content = WindowContent::ObservationsOnly);

// Appends the window payload to `out` without allocating a representation.
void append_window(const Episode& episode, const AgentSpec& spec, std::size_t agent, std::size_t t,
                   std::size_t k, WindowContent content, std::vector<double>& out);

// Encodes one action for window payloads (one-hot for discrete spaces).
void append_action_encoding(const Action& a, const ActionSpace& space, std::vector<double>& out);

}  // namespace marlaudit
