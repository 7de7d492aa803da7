#include "marlaudit/perturb.hpp"

#include <cmath>
#include <random>
#include <string>

#include "marlaudit/errors.hpp"
#include "marlaudit/rng.hpp"

namespace marlaudit {

TrajectoryDataset perturb_observations(const TrajectoryDataset& d, double scale, std::uint64_t seed) {
  if (!(scale >= 0.0 && scale <= kMaxNoiseScale))
    throw ConfigError("noise scale must lie in [0, 0.5], got " + std::to_string(scale));
  TrajectoryDataset out = d;
  if (scale == 0.0) return out;

  // Population standard deviation per (agent, feature) over the whole dataset.
  const std::size_t na = d.num_agents();
  std::vector<std::vector<double>> sigma(na);
  for (std::size_t i = 0; i < na; ++i) {
    const auto dim = static_cast<std::size_t>(d.agent(i).obs_dim);
    std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
    double n = 0.0;
    for (const auto& ep : d.episodes)
      for (const auto& s : ep.agents[i]) {
        n += 1.0;
        for (std::size_t f = 0; f < dim; ++f) mean[f] += s.obs[f];
      }
    for (auto& m : mean) m /= n;
    for (const auto& ep : d.episodes)
      for (const auto& s : ep.agents[i])
        for (std::size_t f = 0; f < dim; ++f) sq[f] += (s.obs[f] - mean[f]) * (s.obs[f] - mean[f]);
    sigma[i].resize(dim);
    for (std::size_t f = 0; f < dim; ++f) sigma[i][f] = std::sqrt(sq[f] / n);
  }

  for (std::size_t e = 0; e < out.episodes.size(); ++e) {
    auto& ep = out.episodes[e];
    Rng rng = make_rng(seed, {0x7e57, e});
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < na; ++i)
      for (auto& s : ep.agents[i])
        for (std::size_t f = 0; f < s.obs.size(); ++f) {
          const double z = gauss(rng);
          if (sigma[i][f] > 0.0) s.obs[f] += scale * sigma[i][f] * z;
        }
  }
  return out;
}

}  // namespace marlaudit
