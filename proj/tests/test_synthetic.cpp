#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "marlaudit/diagnostics.hpp"
#include "marlaudit/errors.hpp"
#include "marlaudit/estimators.hpp"
#include "marlaudit/synthetic.hpp"
#include "support.hpp"

using namespace marlaudit;

namespace {

const double kLn2 = std::log(2.0);

TrajectoryDataset planted(PlantedKind k, std::uint64_t seed, std::size_t episodes = 500, std::size_t T = 20) {
  PlantedScenario s;
  s.kind = k;
  s.seed = seed;
  s.n_episodes = episodes;
  s.T = T;
  return generate(s);
}

SampleColumn random_labels(std::size_t n, int arity, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, arity - 1);
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = u(rng);
  return SampleColumn::discrete(std::move(v));
}

}  // namespace

TEST_CASE("exact information of small tables") {
  const std::size_t x[] = {0}, y[] = {1}, z[] = {2};

  JointPmf product{{2, 3}, {}};
  for (double a : {0.3, 0.7})
    for (double b : {0.2, 0.5, 0.3}) product.p.push_back(a * b);
  CHECK(std::abs(exact_mi(product, x, y)) < 1e-15);
  CHECK(exact_entropy(product, x) == doctest::Approx(-(0.3 * std::log(0.3) + 0.7 * std::log(0.7))));

  const JointPmf copy{{2, 2}, {0.5, 0, 0, 0.5}};
  CHECK(exact_mi(copy, x, y) == doctest::Approx(kLn2).epsilon(1e-14));

  JointPmf xorpmf{{2, 2, 2}, std::vector<double>(8, 0.0)};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) xorpmf.p[(a * 2 + b) * 2 + (a ^ b)] = 0.25;
  CHECK(std::abs(exact_mi(xorpmf, x, y)) < 1e-15);
  CHECK(exact_mi(xorpmf, x, y, z) == doctest::Approx(kLn2).epsilon(1e-14));
}

TEST_CASE("joint table validation") {
  CHECK_THROWS_AS((JointPmf{{2, 2}, {0.5, 0.5, 0.1, -0.1}}.validate()), ConfigError);
  CHECK_THROWS_AS((JointPmf{{2, 2}, {0.5, 0.5}}.validate()), ConfigError);
  CHECK_THROWS_AS((JointPmf{{2, 2}, {0.3, 0.3, 0.3, 0.3}}.validate()), ConfigError);
  const JointPmf huge{{1000, 1000, 2}, {}};
  CHECK_THROWS_WITH_AS(huge.size(), doctest::Contains("enumerate smaller"), ConfigError);
}

TEST_CASE("plug-in estimates equal exact information of the empirical table") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> arity(1, 4);
  std::uniform_int_distribution<std::size_t> size(2, 3000);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = size(rng);
    const auto a = random_labels(n, arity(rng), rng);
    auto b = random_labels(n, arity(rng), rng);
    const auto c = random_labels(n, arity(rng), rng);
    const SampleColumn cols[] = {a, b, c};
    const auto pmf = empirical_joint(cols);
    const std::size_t x[] = {0}, y[] = {1}, z[] = {2};
    CHECK(std::abs(mi_discrete(a, b).value - exact_mi(pmf, x, y)) <= 1e-12);
    CHECK(std::abs(cmi_discrete(a, b, c).value - exact_mi(pmf, x, y, z)) <= 1e-12);
    CHECK(std::abs(entropy_discrete(c).value - exact_entropy(pmf, z)) <= 1e-12);
  }
}

TEST_CASE("empirical joints of planted datasets") {
  using S = VariableSelector;
  const std::size_t x[] = {0}, y[] = {1}, z[] = {2};

  const auto reactive = planted(PlantedKind::ReactiveCopy, 1);
  const S oa[] = {S::obs(0), S::action(0)};
  const auto diag = empirical_joint(reactive, oa);
  CHECK(diag.p[1] == 0);
  CHECK(diag.p[2] == 0);
  CHECK(diag.p[0] + diag.p[3] == doctest::Approx(1.0));
  CHECK(exact_mi(diag, x, y) == doctest::Approx(kLn2).epsilon(0.01));

  // Plug-in OAR agrees with the table it was estimated from.
  DiagnosticConfig cfg;
  cfg.history = HistoryMode::window_of(1);
  CHECK(std::abs(compute_oar(reactive, 0, cfg).raw.value - exact_mi(diag, x, y)) <= 1e-12);

  const auto independent = planted(PlantedKind::Independent, 2);
  const S pair[] = {S::action(0), S::action(1)};
  CHECK(exact_mi(empirical_joint(independent, pair), x, y) <= 0.01);

  const auto lagged = planted(PlantedKind::LaggedFollower, 3);
  const S lag[] = {S::action(0, 1), S::action(1), S::action(0)};
  const auto lt = empirical_joint(lagged, lag);
  CHECK(exact_mi(lt, x, y, z) == doctest::Approx(kLn2).epsilon(0.01));
  CHECK(exact_mi(lt, z, y) <= 0.01);

  const auto memory = planted(PlantedKind::MemoryCopy, 4);
  const S mem[] = {S::obs(0, 0, 1), S::action(0), S::obs(0)};
  const auto mt = empirical_joint(memory, mem);
  CHECK(exact_mi(mt, x, y, z) == doctest::Approx(kLn2).epsilon(0.01));
  CHECK(exact_mi(mt, z, y) <= 0.01);
}

TEST_CASE("empirical joint errors") {
  const auto d = planted(PlantedKind::Independent, 5, 10, 5);
  CHECK_THROWS(empirical_joint(d, std::span<const VariableSelector>{}));
  const VariableSelector far[] = {VariableSelector::action(0, 5)};
  CHECK_THROWS(empirical_joint(d, far));
  const VariableSelector bad_agent[] = {VariableSelector::action(7)};
  CHECK_THROWS(empirical_joint(d, bad_agent));

  const SampleColumn cont[] = {SampleColumn::continuous({0.5, 1.5}, 1)};
  CHECK_THROWS_WITH(empirical_joint(cont), doctest::Contains("continuous"));
}

TEST_CASE("generator determinism and argument checks") {
  for (auto k : kAllPlantedKinds) {
    CHECK(parse_planted(planted_name(k)) == k);
    const auto a = planted(k, 9, 20, 6);
    CHECK(a == planted(k, 9, 20, 6));
    CHECK_FALSE(a == planted(k, 10, 20, 6));
    CHECK(a.episodes.size() == 20);
    CHECK(a.manifest.num_agents == 2);
  }
  CHECK_THROWS_AS(parse_planted("copycat"), ConfigError);

  PlantedScenario s;
  s.lag = 3;
  s.T = 3;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s.T = 4;
  CHECK_NOTHROW(generate(s));
  s.n_episodes = 0;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s.n_episodes = 5;
  s.num_agents = 1;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s.num_agents = 3;
  s.arity = 1;
  CHECK_THROWS_AS(generate(s), ConfigError);
}

TEST_CASE("extra agents stay inert and lag shifts the follower") {
  PlantedScenario s;
  s.kind = PlantedKind::LaggedFollower;
  s.lag = 3;
  s.num_agents = 4;
  s.arity = 3;
  s.n_episodes = 30;
  s.T = 10;
  s.seed = 12;
  const auto d = generate(s);
  for (const auto& ep : d.episodes) {
    for (std::size_t t = 0; t < 10; ++t) {
      const auto a1 = std::get<std::int64_t>(ep.agents[1][t].action);
      CHECK(a1 == (t < 3 ? 0 : std::get<std::int64_t>(ep.agents[0][t - 3].action)));
      for (std::size_t i = 2; i < 4; ++i) {
        CHECK(std::get<std::int64_t>(ep.agents[i][t].action) == 0);
        CHECK(ep.agents[i][t].obs == std::vector<double>{0.0});
      }
    }
  }
}
