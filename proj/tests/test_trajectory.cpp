#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "marlaudit/errors.hpp"
#include "marlaudit/history.hpp"
#include "marlaudit/perturb.hpp"
#include "marlaudit/synthetic.hpp"
#include "marlaudit/wire_format.hpp"
#include "support.hpp"

using namespace marlaudit;

namespace {

const char* kManifest = R"({
  "scenario": "unit",
  "algorithm": "MAPPO",
  "architecture": "RNN",
  "seed": 3,
  "num_agents": 2,
  "agents": [
    {"action_space": {"type": "discrete", "n": 5}, "obs_dim": 2, "hidden_dim": 0},
    {"action_space": {"type": "discrete", "n": 5}, "obs_dim": 2, "hidden_dim": 0}
  ],
  "checkpoint_fraction": 1.0
})";

std::string episode_lines(std::size_t episodes, std::size_t T) {
  std::string out;
  for (std::size_t e = 0; e < episodes; ++e)
    for (std::size_t t = 0; t < T; ++t)
      for (int a = 0; a < 2; ++a)
        out += "{\"episode\": " + std::to_string(e) + ", \"agent\": " + std::to_string(a) +
               ", \"t\": " + std::to_string(t) + ", \"obs\": [0.5, -1.25e-3], \"action\": " +
               std::to_string((e + t + a) % 5) + "}\n";
  return out;
}

double population_sd(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("well-formed files load into a validated dataset") {
  const auto d = parse_dataset(kManifest, episode_lines(3, 4));
  CHECK(d.episodes.size() == 3);
  CHECK(d.num_agents() == 2);
  CHECK(d.episodes[1].length() == 4);
  CHECK(d.episodes[2].agents[1][3].obs[1] == doctest::Approx(-1.25e-3));
  CHECK(std::get<std::int64_t>(d.episodes[2].agents[1][3].action) == (2 + 3 + 1) % 5);
}

TEST_CASE("writer output reloads and reserializes byte-identically") {
  PlantedScenario s;
  s.kind = PlantedKind::PrivateGoal;
  s.n_episodes = 4;
  s.T = 6;
  s.seed = 11;
  const auto d = generate(s);
  testing::TempDir dir;
  write_dataset(d, dir.path());
  const auto back = load_dataset(dir.path());
  CHECK(back == d);
  CHECK(serialize_manifest(back.manifest) == read_text_file(dir / kManifestFile));
  CHECK(serialize_episodes(back) == read_text_file(dir / kEpisodesFile));
}

TEST_CASE("continuous actions, hidden states and awkward doubles round-trip exactly") {
  TrajectoryDataset d;
  d.manifest = testing::discrete_manifest(2, 3, 2, 3);
  d.manifest.agents[1].action_space = ContinuousSpace{2};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1e-7);
  for (int e = 0; e < 2; ++e) {
    Episode ep;
    ep.episode_id = e * 10;
    ep.agents.resize(2);
    for (int t = 0; t < 3; ++t) {
      ep.agents[0].push_back({t, {g(rng), 1e300}, std::int64_t{t % 3}, {g(rng), 0.1, -0.0}});
      ep.agents[1].push_back({t, {1.0 / 3.0, g(rng)}, std::vector<double>{g(rng), 5e-324}, {1, 2, 3}});
    }
    d.episodes.push_back(ep);
  }
  validate_dataset(d);
  const auto back = parse_dataset(serialize_manifest(d.manifest), serialize_episodes(d));
  CHECK(back == d);
  CHECK(serialize_episodes(back) == serialize_episodes(d));
}

TEST_CASE("records may arrive in any order") {
  std::string lines = episode_lines(2, 3);
  std::vector<std::string> rows;
  for (std::size_t p = 0, q; (q = lines.find('\n', p)) != std::string::npos; p = q + 1) rows.push_back(lines.substr(p, q - p));
  std::reverse(rows.begin(), rows.end());
  std::string shuffled;
  for (const auto& r : rows) shuffled += r + "\n";
  CHECK(parse_dataset(kManifest, shuffled) == parse_dataset(kManifest, lines));
}

TEST_CASE("agents with different episode lengths are rejected") {
  std::string lines = episode_lines(1, 10);
  lines.erase(lines.rfind("{\"episode\": 0, \"agent\": 1"));
  try {
    parse_dataset(kManifest, lines);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("episode length mismatch") != std::string::npos);
  }
}

TEST_CASE("a discrete action equal to n is out of range") {
  std::string lines = "{\"episode\": 0, \"agent\": 0, \"t\": 0, \"obs\": [0, 0], \"action\": 5}\n"
                      "{\"episode\": 0, \"agent\": 1, \"t\": 0, \"obs\": [0, 0], \"action\": 4}\n";
  try {
    parse_dataset(kManifest, lines);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("action out of range") != std::string::npos);
    CHECK(msg.find("episode 0 agent 0 t 0") != std::string::npos);
  }
}

TEST_CASE("malformed records report their line number") {
  std::string lines = episode_lines(1, 2);
  lines += "{\"episode\": 0, \"agent\": 0, \"t\": 2, \"obs\": [0, 0]\n";
  try {
    parse_dataset(kManifest, lines);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS(parse_dataset(kManifest, "{\"episode\": 0, \"agent\": 0, \"t\": 0, \"obs\": [0, 0], \"action\": 1, "
                                           "\"extra\": 1}\n"),
                  ParseError);
}

TEST_CASE("load_dataset names the failing file") {
  testing::TempDir dir;
  write_text_file(dir / kManifestFile, kManifest);
  write_text_file(dir / kEpisodesFile, episode_lines(1, 1) + "not json\n");
  try {
    load_dataset(dir.path());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find(kEpisodesFile) != std::string::npos);
  }
}

TEST_CASE("manifest invariants") {
  auto m = testing::discrete_manifest(2, 3);
  CHECK_NOTHROW(validate_manifest(m));
  m.num_agents = 1;
  m.agents.resize(1);
  CHECK_THROWS_AS(validate_manifest(m), ValidationError);
  m = testing::discrete_manifest(2, 3);
  m.checkpoint_fraction = 1.5;
  CHECK_THROWS_AS(validate_manifest(m), ValidationError);
  m = testing::discrete_manifest(2, 3);
  m.agents.pop_back();
  CHECK_THROWS_AS(validate_manifest(m), ValidationError);
  CHECK_THROWS_AS(parse_manifest("{\"scenario\": \"x\"}"), ParseError);
}

TEST_CASE("timestep gaps and hidden-state presence are validated") {
  auto d = testing::two_agent_dataset({{{0, 0, 0}}, {{0, 0, 0}}}, {{{0, 1, 0}}, {{1, 1, 0}}});
  auto gap = d;
  gap.episodes[0].agents[0][2].t = 3;
  gap.episodes[0].agents[1][2].t = 3;
  CHECK_THROWS_AS(validate_dataset(gap), ValidationError);
  auto hidden = d;
  hidden.episodes[0].agents[0][1].hidden = {1.0};
  CHECK_THROWS_AS(validate_dataset(hidden), ValidationError);
}

TEST_CASE("window history layout: oldest step first, [obs | one-hot action | mask]") {
  // Hand-assembled payload for obs [0.3, 0.7], actions [1, 0] at t = 2, k = 2.
  const std::vector<double> expected = {0.3, 0, 1, 1, 0.7, 1, 0, 1};
  const auto d = testing::two_agent_dataset({{{0.3, 0.7, 0.9}}, {{0, 0, 0}}}, {{{1, 0, 1}}, {{0, 0, 0}}});
  const auto h = build_history(d.episodes[0], d.agent(0), 0, 2, HistoryMode::window_of(2),
                               WindowContent::ObservationsAndActions);
  CHECK(h.payload == expected);
  CHECK(h.payload.size() == 2 * window_step_width(d.agent(0), WindowContent::ObservationsAndActions));
}

TEST_CASE("history at t = 0 is pure padding") {
  const auto d = testing::two_agent_dataset({{{0.3, 0.7, 0.9}}, {{0, 0, 0}}}, {{{1, 0, 1}}, {{0, 0, 0}}});
  for (auto content : {WindowContent::ObservationsOnly, WindowContent::ObservationsAndActions}) {
    const auto h = build_history(d.episodes[0], d.agent(0), 0, 0, HistoryMode::window_of(4), content);
    CHECK(h.payload.size() == 4 * window_step_width(d.agent(0), content));
    for (double x : h.payload) CHECK(x == 0.0);
  }
  // Partial padding: only the newest slot at t = 1 is real.
  const auto h = build_history(d.episodes[0], d.agent(0), 0, 1, HistoryMode::window_of(2));
  CHECK(h.payload == std::vector<double>{0, 0, 0.3, 1});
}

TEST_CASE("reactive windows never contain the current observation") {
  // Sentinel audit: mark O_t uniquely and scan every window slot.
  auto d = testing::two_agent_dataset({{{1, 2, 3, 4, 5, 6}}, {{0, 0, 0, 0, 0, 0}}}, {{{0, 0, 0, 0, 0, 0}}, {{0, 0, 0, 0, 0, 0}}});
  for (std::size_t t = 0; t < 6; ++t) {
    const double sentinel = d.episodes[0].agents[0][t].obs[0];
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto h = build_history(d.episodes[0], d.agent(0), 0, t, HistoryMode::window_of(k));
      for (std::size_t s = 0; s < k; ++s) CHECK(h.payload[2 * s] != sentinel);
    }
  }
}

TEST_CASE("hidden-state history passes the recorded vector through") {
  TrajectoryDataset d;
  d.manifest = testing::discrete_manifest(2, 2, 1, 8);
  Episode ep;
  ep.agents.resize(2);
  for (int t = 0; t < 7; ++t)
    for (int a = 0; a < 2; ++a) {
      std::vector<double> h(8);
      for (int q = 0; q < 8; ++q) h[q] = t * 100 + a * 10 + q + 0.5;
      ep.agents[a].push_back({t, {0.0}, std::int64_t{0}, h});
    }
  d.episodes.push_back(ep);
  validate_dataset(d);
  const auto h = build_history(d.episodes[0], d.agent(1), 1, 5, HistoryMode::hidden());
  CHECK(h.payload == d.episodes[0].agents[1][5].hidden);
  CHECK(build_history(d.episodes[0], d.agent(1), 1, 5, HistoryMode::hidden()).payload == h.payload);
}

TEST_CASE("history configuration errors") {
  const auto d = testing::two_agent_dataset({{{0.3}}, {{0}}}, {{{1}}, {{0}}});
  CHECK_THROWS_AS(build_history(d.episodes[0], d.agent(0), 0, 0, HistoryMode::hidden()), ConfigError);
  CHECK_THROWS_AS(build_history(d.episodes[0], d.agent(0), 0, 0, HistoryMode::window_of(0)), ConfigError);
  CHECK_THROWS_AS(build_history(d.episodes[0], d.agent(0), 0, 1, HistoryMode::window_of(1)), std::out_of_range);
}

TEST_CASE("zero noise is the identity and equal seeds agree") {
  PlantedScenario s;
  s.kind = PlantedKind::Independent;
  s.n_episodes = 5;
  s.T = 4;
  const auto d = generate(s);
  CHECK(perturb_observations(d, 0.0, 9) == d);
  CHECK(perturb_observations(d, 0.3, 9) == perturb_observations(d, 0.3, 9));
  CHECK_FALSE(perturb_observations(d, 0.3, 9) == perturb_observations(d, 0.3, 10));
  CHECK_THROWS_AS(perturb_observations(d, 0.6, 9), ConfigError);
  CHECK_THROWS_AS(perturb_observations(d, -0.1, 9), ConfigError);
}

TEST_CASE("noise touches only observations and leaves constant features alone") {
  PlantedScenario s;
  s.kind = PlantedKind::ConventionPair;  // observations constant
  s.n_episodes = 3;
  s.T = 5;
  auto d = generate(s);
  const auto out = perturb_observations(d, 0.5, 1);
  CHECK(out == d);

  TrajectoryDataset h;
  h.manifest = testing::discrete_manifest(2, 2, 2, 2);
  Episode ep;
  ep.agents.resize(2);
  for (int t = 0; t < 50; ++t)
    for (int a = 0; a < 2; ++a) ep.agents[a].push_back({t, {double(t % 7), 4.0}, std::int64_t{t % 2}, {0.5, double(t)}});
  h.episodes.push_back(ep);
  const auto p = perturb_observations(h, 0.5, 2);
  int moved = 0;
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 50; ++t) {
      const auto& before = h.episodes[0].agents[a][t];
      const auto& after = p.episodes[0].agents[a][t];
      CHECK(after.action == before.action);
      CHECK(after.hidden == before.hidden);
      CHECK(after.obs[1] == 4.0);
      moved += after.obs[0] != before.obs[0];
    }
  CHECK(moved == 100);
}

TEST_CASE("noise at scale 0.5 has a 4:1 signal-to-noise ratio") {
  TrajectoryDataset d;
  d.manifest = testing::discrete_manifest(2, 2);
  std::mt19937_64 rng(3);
  std::gamma_distribution<double> skewed(2.0, 3.0);
  std::vector<double> x;
  for (int e = 0; e < 100; ++e) {
    Episode ep;
    ep.episode_id = e;
    ep.agents.resize(2);
    for (int t = 0; t < 100; ++t) {
      const double v = skewed(rng);
      x.push_back(v);
      ep.agents[0].push_back({t, {v}, std::int64_t{0}, {}});
      ep.agents[1].push_back({t, {0.0}, std::int64_t{0}, {}});
    }
    d.episodes.push_back(ep);
  }
  const auto p = perturb_observations(d, 0.5, 17);
  std::vector<double> noise;
  for (std::size_t e = 0; e < 100; ++e)
    for (std::size_t t = 0; t < 100; ++t)
      noise.push_back(p.episodes[e].agents[0][t].obs[0] - d.episodes[e].agents[0][t].obs[0]);
  const double snr = std::pow(population_sd(x), 2) / std::pow(population_sd(noise), 2);
  CHECK(snr == doctest::Approx(4.0).epsilon(0.10));
}
