#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "marlaudit/trajectory.hpp"

namespace testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("marlaudit-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline marlaudit::Manifest discrete_manifest(int num_agents, int n_actions, int obs_dim = 1, int hidden_dim = 0) {
  marlaudit::Manifest m;
  m.scenario = "test";
  m.algorithm = "IPPO";
  m.architecture = "RNN";
  m.seed = 1;
  m.num_agents = num_agents;
  m.agents.assign(static_cast<std::size_t>(num_agents),
                  marlaudit::AgentSpec{marlaudit::DiscreteSpace{n_actions}, obs_dim, hidden_dim});
  m.checkpoint_fraction = 1.0;
  return m;
}

// Two agents, one obs feature, binary actions; obs[i][e][t] and act[i][e][t].
inline marlaudit::TrajectoryDataset two_agent_dataset(const std::vector<std::vector<std::vector<double>>>& obs,
                                                      const std::vector<std::vector<std::vector<std::int64_t>>>& act,
                                                      int n_actions = 2) {
  marlaudit::TrajectoryDataset d;
  d.manifest = discrete_manifest(2, n_actions);
  const std::size_t episodes = obs[0].size();
  for (std::size_t e = 0; e < episodes; ++e) {
    marlaudit::Episode ep;
    ep.episode_id = static_cast<std::int64_t>(e);
    ep.agents.resize(2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t t = 0; t < obs[i][e].size(); ++t)
        ep.agents[i].push_back({static_cast<std::int64_t>(t), {obs[i][e][t]}, act[i][e][t], {}});
    d.episodes.push_back(std::move(ep));
  }
  marlaudit::validate_dataset(d);
  return d;
}

inline std::vector<double> normals(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline double gaussian_mi(double rho) { return -0.5 * std::log(1.0 - rho * rho); }

}  // namespace testing
