#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include "marlaudit/errors.hpp"
#include "marlaudit/estimators.hpp"
#include "marlaudit/kdtree.hpp"
#include "support.hpp"

using namespace marlaudit;
using testing::gaussian_mi;
using testing::normals;

namespace {

const double kLn2 = std::numbers::ln2;

SampleColumn labels(std::vector<std::int64_t> v) { return SampleColumn::discrete(std::move(v)); }
SampleColumn reals(std::vector<double> v) { return SampleColumn::continuous(std::move(v), 1); }

// Plug-in I(X;Y) straight from the definition, with p(x,y), p(x), p(y) counted separately.
double oracle_mi(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  std::map<std::pair<std::int64_t, std::int64_t>, double> pxy;
  std::map<std::int64_t, double> px, py;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    pxy[{x[i], y[i]}] += 1 / n;
    px[x[i]] += 1 / n;
    py[y[i]] += 1 / n;
  }
  double mi = 0;
  for (const auto& [k, p] : pxy) mi += p * std::log(p / (px[k.first] * py[k.second]));
  return mi;
}

std::vector<std::int64_t> pair_code(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * 1000 + b[i];
  return out;
}

std::vector<std::int64_t> random_labels(std::size_t n, int arity, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> u(0, arity - 1);
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("plug-in entropy") {
  CHECK(entropy_discrete(labels(std::vector<std::int64_t>(1000, 0))).value == 0.0);
  CHECK(entropy_discrete(labels({0, 1, 0, 1, 1, 0})).value == doctest::Approx(kLn2).epsilon(1e-14));
  // pmf (1/2, 1/4, 1/4): -(1/2 ln 1/2 + 2 * 1/4 ln 1/4) = 1.5 ln 2
  const auto h = entropy_discrete(labels({7, 7, 3, 9}));
  CHECK(h.value == doctest::Approx(1.5 * kLn2).epsilon(1e-14));
  CHECK(h.estimator_id == "plugin-entropy");
  CHECK(h.k_neighbors == 0);
  CHECK_THROWS_AS(entropy_discrete(labels({})), EstimationError);
}

TEST_CASE("plug-in mutual information") {
  std::vector<std::int64_t> x, y;
  for (int i = 0; i < 500; ++i) x.push_back(i % 2);
  CHECK(mi_discrete(labels(x), labels(x)).value == doctest::Approx(kLn2).epsilon(1e-14));

  x = {0, 0, 1, 1};
  y = {0, 1, 0, 1};
  CHECK(mi_discrete(labels(x), labels(y)).value == 0.0);

  // 0.4 / 0.1 joint realized exactly in counts.
  x.clear();
  y.clear();
  auto add = [&](int a, int b, int c) {
    for (int i = 0; i < c; ++i) x.push_back(a), y.push_back(b);
  };
  add(0, 0, 400), add(1, 1, 400), add(0, 1, 100), add(1, 0, 100);
  const double expected = 2 * 0.4 * std::log(0.4 / 0.25) + 2 * 0.1 * std::log(0.1 / 0.25);
  CHECK(expected == doctest::Approx(0.1927).epsilon(1e-3));
  CHECK(mi_discrete(labels(x), labels(y)).value == doctest::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(mi_discrete(labels({0, 1}), labels({0})), EstimationError);
}

TEST_CASE("plug-in conditional mutual information") {
  std::vector<std::int64_t> x, y, z;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int rep = 0; rep < 25; ++rep) x.push_back(a), y.push_back(b), z.push_back(a ^ b);
  // XOR: p(x,y,z) = 1/4 on consistent cells, p(z) = 1/2, p(x,z) = p(y,z) = 1/4.
  const double xor_oracle = 4 * 0.25 * std::log(0.25 * 0.5 / (0.25 * 0.25));
  CHECK(cmi_discrete(labels(x), labels(y), labels(z)).value == doctest::Approx(xor_oracle).epsilon(1e-13));
  CHECK(xor_oracle == doctest::Approx(kLn2));

  CHECK(cmi_discrete(labels(x), labels(x), labels(x)).value == 0.0);
  const std::vector<std::int64_t> constant(x.size(), 4);
  CHECK(cmi_discrete(labels(x), labels(z), labels(constant)).value ==
        doctest::Approx(mi_discrete(labels(x), labels(z)).value).epsilon(1e-15));
}

TEST_CASE("discrete identities on random samples") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 50 + rng() % 3000;
    const auto x = random_labels(n, 2 + rep % 5, rng);
    auto y = random_labels(n, 2 + rep % 3, rng);
    for (std::size_t i = 0; i < n; i += 3) y[i] = x[i] % 3;  // some dependence
    const auto z = random_labels(n, 2 + rep % 4, rng);
    const auto X = labels(x), Y = labels(y), Z = labels(z);

    CHECK(mi_discrete(X, Y).value == doctest::Approx(oracle_mi(x, y)).epsilon(1e-12));
    CHECK(mi_discrete(X, Y).value == mi_discrete(Y, X).value);
    CHECK(mi_discrete(X, Y).value >= 0.0);
    CHECK(cmi_discrete(X, Y, Z).value >= 0.0);
    // Chain rule: I(X;Y|Z) = I((X,Z);Y) - I(Z;Y).
    const double chain = oracle_mi(pair_code(x, z), y) - oracle_mi(z, y);
    CHECK(std::abs(cmi_discrete(X, Y, Z).value - chain) < 1e-12);
    // Data processing: y = f(x) deterministic.
    std::vector<std::int64_t> fx(n);
    for (std::size_t i = 0; i < n; ++i) fx[i] = (x[i] * 7 + 1) % 3;
    CHECK(std::abs(mi_discrete(X, labels(fx)).value - entropy_discrete(labels(fx)).value) < 1e-12);
  }
}

TEST_CASE("KSG on Gaussians") {
  std::mt19937_64 rng(7);
  const std::size_t n = 10000;
  const auto a = normals(n, rng), b = normals(n, rng);
  const auto indep = mi_ksg(reals(a), reals(b), {3, 1});
  CHECK(std::abs(indep.value) <= 0.02);
  CHECK(indep.estimator_id == "ksg1-maxnorm");
  CHECK(indep.k_neighbors == 3);

  for (double rho : {0.5, 0.9}) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = rho * a[i] + std::sqrt(1 - rho * rho) * b[i];
    const double est = mi_ksg(reals(a), reals(y), {3, 1}).value;
    CHECK(std::abs(est - gaussian_mi(rho)) <= 0.05);
  }
}

TEST_CASE("KSG is symmetric and reproducible") {
  std::mt19937_64 rng(8);
  const auto a = normals(2000, rng), b = normals(2000, rng);
  std::vector<double> y(2000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + b[i];
  const double xy = mi_ksg(reals(a), reals(y), {3, 5}).value;
  CHECK(mi_ksg(reals(a), reals(y), {3, 5}).value == xy);
  CHECK(mi_ksg(reals(y), reals(a), {3, 5}).value == doctest::Approx(xy).epsilon(1e-9));
}

TEST_CASE("KSG preconditions") {
  CHECK_THROWS_AS(mi_ksg(reals({1, 2, 3}), reals({1, 2, 3}), {3, 0}), EstimationError);
  CHECK_THROWS_AS(SampleColumn::continuous({1.0, NAN}, 1), EstimationError);
  CHECK_THROWS_AS(SampleColumn::continuous({1.0, 2.0, 3.0}, 2), EstimationError);
}

TEST_CASE("mixed estimator against independence and a two-component mixture") {
  std::mt19937_64 rng(9);
  const std::size_t n = 10000;
  const auto g = normals(n, rng);
  const auto coin = random_labels(n, 2, rng);
  const auto indep = mi_mixed(reals(g), labels(coin), {3, 2});
  CHECK(std::abs(indep.value) <= 0.02);
  CHECK(indep.estimator_id == "ross-mixed");

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 4.0 * static_cast<double>(coin[i]) + g[i];
  // I = h(X) - h(X|Y), h(X|Y) = 0.5 ln(2 pi e), h(X) by Simpson quadrature of the mixture density.
  auto density = [](double v) {
    const double c = 1 / std::sqrt(2 * std::numbers::pi);
    return 0.5 * c * (std::exp(-0.5 * v * v) + std::exp(-0.5 * (v - 4) * (v - 4)));
  };
  const int steps = 20000;
  const double lo = -12, hi = 16, hstep = (hi - lo) / steps;
  double hx = 0;
  for (int s = 0; s <= steps; ++s) {
    const double v = lo + s * hstep, f = density(v);
    const double w = (s == 0 || s == steps) ? 1 : (s % 2 ? 4 : 2);
    if (f > 0) hx -= w * f * std::log(f);
  }
  hx *= hstep / 3;
  const double oracle = hx - 0.5 * std::log(2 * std::numbers::pi * std::numbers::e);
  CHECK(oracle < kLn2);
  CHECK(oracle > 0.6);
  CHECK(std::abs(mi_mixed(reals(x), labels(coin), {3, 2}).value - oracle) <= 0.05);
  CHECK(std::abs(mutual_information(reals(x), labels(coin), {3, 2}).value - oracle) <= 0.05);

  CHECK(mi_mixed(reals(x), labels(std::vector<std::int64_t>(n, 1)), {3, 2}).value == 0.0);
}

TEST_CASE("mixed estimator skips tiny classes") {
  std::mt19937_64 rng(10);
  auto x = normals(200, rng);
  std::vector<std::int64_t> y(200, 0);
  for (int i = 0; i < 100; ++i) y[i] = 1;
  y[0] = 2;  // singleton class
  const auto est = mi_mixed(reals(x), labels(y), {3, 0});
  CHECK(est.warnings.size() == 1);
  CHECK(est.n_samples == 199);

  std::vector<std::int64_t> tiny(6);
  for (int i = 0; i < 6; ++i) tiny[i] = i / 2;
  CHECK_THROWS_AS(mi_mixed(reals({1, 2, 3, 4, 5, 6}), labels(tiny), {3, 0}), EstimationError);
}

TEST_CASE("Frenzel-Pompe conditional estimator") {
  std::mt19937_64 rng(11);
  const std::size_t n = 10000;
  const auto x = normals(n, rng), z = normals(n, rng), e = normals(n, rng);
  CHECK(std::abs(cmi_knn(reals(x), reals(e), reals(z), {3, 3}).value) <= 0.03);

  // y = x + z + e: I(X;Y|Z) = I(X; X + e) = 0.5 ln 2.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + z[i] + e[i];
  const auto est = cmi_knn(reals(x), reals(y), reals(z), {3, 3});
  CHECK(std::abs(est.value - gaussian_mi(std::sqrt(0.5))) <= 0.07);
  CHECK(est.estimator_id == "frenzel-pompe-cmi");

  CHECK(std::abs(cmi_knn(reals(x), reals(x), reals(x), {3, 3}).value) <= 0.03);
}

TEST_CASE("conditional entropy") {
  std::mt19937_64 rng(12);
  const std::size_t n = 10000;
  const auto y = random_labels(n, 2, rng);
  const auto zd = random_labels(n, 3, rng);
  CHECK(std::abs(cond_entropy(labels(y), labels(zd)).value - kLn2) <= 0.02);
  CHECK(std::abs(cond_entropy(labels(y), reals(normals(n, rng)), {3, 1}).value - kLn2) <= 0.02);

  std::vector<std::int64_t> fz(n);
  for (std::size_t i = 0; i < n; ++i) fz[i] = zd[i] % 2;
  CHECK(std::abs(cond_entropy(labels(fz), labels(zd)).value) <= 0.02);
  CHECK(cond_entropy(labels(y), labels(y)).value == 0.0);
  CHECK_THROWS_AS(cond_entropy(labels({0, 1}), labels({0})), EstimationError);

  // Continuous y given continuous z: h(Y|Z) for Y = Z + N(0,1) is 0.5 ln(2 pi e).
  const auto zc = normals(n, rng), noise = normals(n, rng);
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = zc[i] + noise[i];
  CHECK(cond_entropy(reals(yc), reals(zc), {3, 1}).value ==
        doctest::Approx(0.5 * std::log(2 * std::numbers::pi * std::numbers::e)).epsilon(0.05));
}

TEST_CASE("Kozachenko-Leonenko entropy of a standard normal") {
  std::mt19937_64 rng(13);
  const double h = entropy_knn(reals(normals(10000, rng)), {3, 4}).value;
  CHECK(h == doctest::Approx(0.5 * std::log(2 * std::numbers::pi * std::numbers::e)).epsilon(0.02));
}

TEST_CASE("digamma at integers") {
  CHECK(digamma_int(1) == doctest::Approx(-0.5772156649015329).epsilon(1e-14));
  double psi = -0.5772156649015329;
  for (std::size_t n = 1; n < 200; ++n) {
    CHECK(digamma_int(n) == doctest::Approx(psi).epsilon(1e-13));
    psi += 1.0 / static_cast<double>(n);
  }
}

TEST_CASE("k-d tree counts agree with brute force") {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> grid(0, 6);
  for (std::size_t dim : {1u, 2u, 3u}) {
    const std::size_t n = 300;
    std::vector<double> pts(n * dim);
    for (auto& p : pts) p = grid(rng) * 0.5;  // many exact ties
    const ChebyshevKdTree tree(pts, dim, 4);
    auto dist = [&](std::size_t a, std::size_t b) {
      double m = 0;
      for (std::size_t d = 0; d < dim; ++d) m = std::max(m, std::abs(pts[a * dim + d] - pts[b * dim + d]));
      return m;
    };
    for (std::size_t i = 0; i < n; i += 7) {
      std::vector<double> ds;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) ds.push_back(dist(i, j));
      std::sort(ds.begin(), ds.end());
      for (std::size_t k : {1u, 3u, 10u}) CHECK(tree.kth_neighbor_distance(i, k) == ds[k - 1]);
      for (double r : {0.0, 0.5, 0.75, 1.0, 2.0}) {
        const auto closer = std::count_if(ds.begin(), ds.end(), [&](double d) { return d < r; });
        const auto within = std::count_if(ds.begin(), ds.end(), [&](double d) { return d <= r; });
        CHECK(tree.count_closer(i, r) == static_cast<std::size_t>(closer));
        CHECK(tree.count_within(i, r) == static_cast<std::size_t>(within));
      }
    }
  }
}

TEST_CASE("integer-valued rows are treated as discrete") {
  const auto c = SampleColumn::from_rows({0, 1, 1, 0, 2, 2}, 2);
  CHECK(c.is_discrete());
  CHECK(c.size() == 3);
  CHECK(c.labels()[0] != c.labels()[1]);
  CHECK_FALSE(SampleColumn::from_rows({0.5, 1}, 1).is_discrete());
  const auto j = SampleColumn::join(labels({0, 1, 0}), labels({1, 1, 0}));
  CHECK(j.is_discrete());
  CHECK(entropy_discrete(j).value == doctest::Approx(std::log(3.0)));
}
