#pragma once

#include <cstdint>

#include "marlaudit/trajectory.hpp"

namespace marlaudit {

inline constexpr double kMaxNoiseScale = 0.5;

// Replaces every observation feature x by x + eps, eps ~ N(0, (scale * sigma_x)^2),
// where sigma_x is the population standard deviation of that (agent, feature)
// over the whole input dataset. Actions and hidden states are untouched.
// Noise for each episode comes from a substream of `seed`, so the output does
// not depend on processing order. scale == 0 and constant features are
// returned bit-identical. Throws ConfigError unless 0 <= scale <= 0.5.
TrajectoryDataset perturb_observations(const TrajectoryDataset& d, double scale, std::uint64_t seed);

}  // namespace marlaudit
