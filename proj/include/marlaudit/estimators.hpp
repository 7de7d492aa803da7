#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "marlaudit/sample_column.hpp"

namespace marlaudit {

inline constexpr int kDefaultNeighbors = 3;
// Relative magnitude of the tie-breaking jitter added to kNN coordinates.
inline constexpr double kTieJitter = 1e-10;

struct EstimateNats {
  double value = 0.0;
  std::size_t n_samples = 0;
  std::string estimator_id;
  int k_neighbors = 0;  // 0 for plug-in
  std::vector<std::string> warnings;
};

struct KnnOptions {
  int k = kDefaultNeighbors;
  std::uint64_t seed = 0;  // jitter stream
};

// Plug-in (empirical-distribution) estimators. Exact for the sample, in nats.
EstimateNats entropy_discrete(const SampleColumn& x);
EstimateNats mi_discrete(const SampleColumn& x, const SampleColumn& y);
EstimateNats cmi_discrete(const SampleColumn& x, const SampleColumn& y, const SampleColumn& z);

// Kraskov-Stoegbauer-Grassberger, first variant, max-norm neighbourhoods.
EstimateNats mi_ksg(const SampleColumn& x, const SampleColumn& y, const KnnOptions& opt = {});
// Ross nearest-neighbour estimator for continuous x against discrete y.
// Classes with <= k members are skipped (warning recorded).
EstimateNats mi_mixed(const SampleColumn& x, const SampleColumn& y, const KnnOptions& opt = {});
// Frenzel-Pompe conditional estimator; discrete columns enter through their embedding.
EstimateNats cmi_knn(const SampleColumn& x, const SampleColumn& y, const SampleColumn& z,
                     const KnnOptions& opt = {});
// Kozachenko-Leonenko differential entropy (max-norm).
EstimateNats entropy_knn(const SampleColumn& x, const KnnOptions& opt = {});
// H(Y | Z). Discrete y: plug-in chain rule (mixed estimator when z is continuous).
// Continuous y: kNN differential analogue, may be negative.
EstimateNats cond_entropy(const SampleColumn& y, const SampleColumn& z, const KnnOptions& opt = {});

// Pick the estimator from the column kinds.
EstimateNats mutual_information(const SampleColumn& x, const SampleColumn& y, const KnnOptions& opt = {});
EstimateNats conditional_mutual_information(const SampleColumn& x, const SampleColumn& y,
                                            const SampleColumn& z, const KnnOptions& opt = {});
EstimateNats entropy(const SampleColumn& x, const KnnOptions& opt = {});

// psi(n) for positive integers.
double digamma_int(std::size_t n);

}  // namespace marlaudit
