#include "marlaudit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "marlaudit/errors.hpp"
#include "marlaudit/kdtree.hpp"
#include "marlaudit/rng.hpp"

namespace marlaudit {

namespace {

void require_discrete(const SampleColumn& c, const char* who) {
  if (!c.is_discrete()) throw EstimationError(std::string(who) + ": column is not discrete");
}

void require_same_length(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw EstimationError(std::string(who) + ": length mismatch (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
}

// Dense labels plus their counts.
struct Tally {
  std::vector<std::int64_t> label;
  std::vector<double> count;
};

Tally tally(std::span<const std::int64_t> raw) {
  std::int64_t k = 0;
  Tally t{dense_labels(raw, &k), {}};
  t.count.assign(static_cast<std::size_t>(k), 0.0);
  for (auto l : t.label) t.count[static_cast<std::size_t>(l)] += 1.0;
  return t;
}

std::vector<std::int64_t> pair_keys(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  const std::int64_t nb = b.empty() ? 1 : *std::max_element(b.begin(), b.end()) + 1;
  std::vector<std::int64_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * nb + b[i];
  return out;
}

// First sample index of every dense label.
std::vector<std::size_t> representatives(const Tally& t) {
  std::vector<std::size_t> rep(t.count.size(), 0);
  std::vector<bool> seen(t.count.size(), false);
  for (std::size_t i = 0; i < t.label.size(); ++i) {
    const auto l = static_cast<std::size_t>(t.label[i]);
    if (!seen[l]) {
      seen[l] = true;
      rep[l] = i;
    }
  }
  return rep;
}

// Embeds a column for kNN search and adds the deterministic tie-breaking jitter.
std::vector<double> jittered_embedding(const SampleColumn& c, std::uint64_t seed, std::uint64_t role,
                                       std::size_t& width) {
  auto rows = c.embedding(width);
  const std::size_t n = c.size();
  Rng rng = make_rng(seed, {0x6a17, role});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t d = 0; d < width; ++d) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += rows[i * width + d];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) sq += (rows[i * width + d] - mean) * (rows[i * width + d] - mean);
    double scale = std::sqrt(sq / static_cast<double>(n));
    if (!(scale > 0.0)) scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) rows[i * width + d] += kTieJitter * scale * u(rng);
  }
  return rows;
}

std::vector<double> concat_rows(std::initializer_list<std::pair<const std::vector<double>*, std::size_t>> parts,
                                std::size_t n, std::size_t& width) {
  width = 0;
  for (const auto& p : parts) width += p.second;
  std::vector<double> out(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t off = 0;
    for (const auto& [rows, w] : parts) {
      std::copy_n(rows->data() + i * w, w, out.data() + i * width + off);
      off += w;
    }
  }
  return out;
}

void check_knn_size(std::size_t n, int k, const char* who) {
  if (k < 1) throw EstimationError(std::string(who) + ": k must be >= 1");
  if (n <= static_cast<std::size_t>(k))
    throw EstimationError(std::string(who) + ": need more samples than neighbours (n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
}

EstimateNats make(double v, std::size_t n, const char* id, int k) { return {v, n, id, k, {}}; }

}  // namespace

double digamma_int(std::size_t n) {
  if (n == 0) throw std::domain_error("digamma of zero");
  double acc = 0.0;
  double x = static_cast<double>(n);
  // Shift into the asymptotic regime with psi(x) = psi(x+1) - 1/x.
  while (x < 20.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  const double series =
      std::log(x) - 0.5 * inv -
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
  return acc + series;
}

EstimateNats entropy_discrete(const SampleColumn& x) {
  require_discrete(x, "entropy_discrete");
  if (x.empty()) throw EstimationError("entropy_discrete: empty column");
  const auto t = tally(x.labels());
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (double c : t.count) h += (c / n) * std::log(n / c);
  return make(h, x.size(), "plugin-entropy", 0);
}

EstimateNats mi_discrete(const SampleColumn& x, const SampleColumn& y) {
  require_discrete(x, "mi_discrete");
  require_discrete(y, "mi_discrete");
  require_same_length(x.size(), y.size(), "mi_discrete");
  if (x.empty()) throw EstimationError("mi_discrete: empty columns");
  const auto tx = tally(x.labels()), ty = tally(y.labels());
  const auto txy = tally(pair_keys(tx.label, ty.label));
  const auto rep = representatives(txy);
  const double n = static_cast<double>(x.size());
  std::vector<double> terms;
  terms.reserve(txy.count.size());
  for (std::size_t c = 0; c < txy.count.size(); ++c) {
    const auto i = rep[c];
    const double cxy = txy.count[c];
    const double cx = tx.count[static_cast<std::size_t>(tx.label[i])];
    const double cy = ty.count[static_cast<std::size_t>(ty.label[i])];
    terms.push_back((cxy / n) * std::log((cxy * n) / (cx * cy)));
  }
  // Summing in sorted order makes the result independent of argument order.
  std::sort(terms.begin(), terms.end());
  const double mi = std::accumulate(terms.begin(), terms.end(), 0.0);
  return make(std::max(mi, 0.0), x.size(), "plugin-mi", 0);
}

EstimateNats cmi_discrete(const SampleColumn& x, const SampleColumn& y, const SampleColumn& z) {
  require_discrete(x, "cmi_discrete");
  require_discrete(y, "cmi_discrete");
  require_discrete(z, "cmi_discrete");
  require_same_length(x.size(), y.size(), "cmi_discrete");
  require_same_length(x.size(), z.size(), "cmi_discrete");
  if (x.empty()) throw EstimationError("cmi_discrete: empty columns");
  const auto tx = tally(x.labels()), ty = tally(y.labels()), tz = tally(z.labels());
  const auto txz = tally(pair_keys(tx.label, tz.label));
  const auto tyz = tally(pair_keys(ty.label, tz.label));
  const auto txyz = tally(pair_keys(txz.label, ty.label));
  const auto rep = representatives(txyz);
  const double n = static_cast<double>(x.size());
  double cmi = 0.0;
  for (std::size_t c = 0; c < txyz.count.size(); ++c) {
    const auto i = rep[c];
    const double cxyz = txyz.count[c];
    const double cz = tz.count[static_cast<std::size_t>(tz.label[i])];
    const double cxz = txz.count[static_cast<std::size_t>(txz.label[i])];
    const double cyz = tyz.count[static_cast<std::size_t>(tyz.label[i])];
    cmi += (cxyz / n) * std::log((cxyz * cz) / (cxz * cyz));
  }
  return make(std::max(cmi, 0.0), x.size(), "plugin-cmi", 0);
}

EstimateNats mi_ksg(const SampleColumn& x, const SampleColumn& y, const KnnOptions& opt) {
  require_same_length(x.size(), y.size(), "mi_ksg");
  const std::size_t n = x.size();
  check_knn_size(n, opt.k, "mi_ksg");
  std::size_t wx = 0, wy = 0, wj = 0;
  const auto ex = jittered_embedding(x, opt.seed, 1, wx);
  const auto ey = jittered_embedding(y, opt.seed, 2, wy);
  const auto joint = concat_rows({{&ex, wx}, {&ey, wy}}, n, wj);

  const ChebyshevKdTree tj(joint, wj), tx(ex, wx), ty(ey, wy);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = tj.kth_neighbor_distance(i, static_cast<std::size_t>(opt.k));
    acc += digamma_int(tx.count_closer(i, eps) + 1) + digamma_int(ty.count_closer(i, eps) + 1);
  }
  const double mi = digamma_int(static_cast<std::size_t>(opt.k)) + digamma_int(n) - acc / static_cast<double>(n);
  return make(mi, n, "ksg1-maxnorm", opt.k);
}

EstimateNats mi_mixed(const SampleColumn& x, const SampleColumn& y, const KnnOptions& opt) {
  require_discrete(y, "mi_mixed");
  require_same_length(x.size(), y.size(), "mi_mixed");
  check_knn_size(x.size(), opt.k, "mi_mixed");
  const auto k = static_cast<std::size_t>(opt.k);
  const auto ty = tally(y.labels());

  EstimateNats out = make(0.0, 0, "ross-mixed", opt.k);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (ty.count[static_cast<std::size_t>(ty.label[i])] > static_cast<double>(k)) kept.push_back(i);
  std::size_t live_classes = 0;
  for (std::size_t c = 0; c < ty.count.size(); ++c) {
    if (ty.count[c] > static_cast<double>(k))
      ++live_classes;
    else
      out.warnings.push_back("class " + std::to_string(c) + " has " + std::to_string(static_cast<long>(ty.count[c])) +
                             " <= k members; skipped");
  }
  if (kept.empty()) throw EstimationError("mi_mixed: estimation infeasible, every class has <= k members");
  out.n_samples = kept.size();
  if (live_classes == 1) return out;  // a single class carries no information

  const SampleColumn xs = x.subset(kept);
  std::vector<std::int64_t> labels(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) labels[r] = ty.label[kept[r]];
  const auto tys = tally(labels);

  std::size_t w = 0;
  const auto ex = jittered_embedding(xs, opt.seed, 1, w);
  const ChebyshevKdTree full(ex, w);
  const std::size_t n = kept.size();

  // Per class: k-th neighbour radius among same-class points, then the number
  // of points of any class inside that radius.
  double acc = 0.0;
  for (std::size_t c = 0; c < tys.count.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < n; ++r)
      if (static_cast<std::size_t>(tys.label[r]) == c) members.push_back(r);
    std::vector<double> pts(members.size() * w);
    for (std::size_t m = 0; m < members.size(); ++m)
      std::copy_n(ex.data() + members[m] * w, w, pts.data() + m * w);
    const ChebyshevKdTree cls(pts, w);
    const double psi_nc = digamma_int(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      const double d = cls.kth_neighbor_distance(m, k);
      const std::size_t mi = full.count_within(members[m], d);
      acc += (digamma_int(n) - psi_nc) + (digamma_int(k) - digamma_int(std::max<std::size_t>(mi, 1)));
    }
  }
  out.value = acc / static_cast<double>(n);
  return out;
}

EstimateNats cmi_knn(const SampleColumn& x, const SampleColumn& y, const SampleColumn& z, const KnnOptions& opt) {
  require_same_length(x.size(), y.size(), "cmi_knn");
  require_same_length(x.size(), z.size(), "cmi_knn");
  const std::size_t n = x.size();
  check_knn_size(n, opt.k, "cmi_knn");
  std::size_t wx = 0, wy = 0, wz = 0, wj = 0, wxz = 0, wyz = 0;
  const auto ex = jittered_embedding(x, opt.seed, 1, wx);
  const auto ey = jittered_embedding(y, opt.seed, 2, wy);
  const auto ez = jittered_embedding(z, opt.seed, 3, wz);
  const auto joint = concat_rows({{&ex, wx}, {&ey, wy}, {&ez, wz}}, n, wj);
  const auto xz = concat_rows({{&ex, wx}, {&ez, wz}}, n, wxz);
  const auto yz = concat_rows({{&ey, wy}, {&ez, wz}}, n, wyz);

  const ChebyshevKdTree tj(joint, wj), txz(xz, wxz), tyz(yz, wyz), tz(ez, wz);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = tj.kth_neighbor_distance(i, static_cast<std::size_t>(opt.k));
    acc += digamma_int(txz.count_closer(i, eps) + 1) + digamma_int(tyz.count_closer(i, eps) + 1) -
           digamma_int(tz.count_closer(i, eps) + 1);
  }
  const double cmi = digamma_int(static_cast<std::size_t>(opt.k)) - acc / static_cast<double>(n);
  return make(cmi, n, "frenzel-pompe-cmi", opt.k);
}

EstimateNats entropy_knn(const SampleColumn& x, const KnnOptions& opt) {
  const std::size_t n = x.size();
  check_knn_size(n, opt.k, "entropy_knn");
  std::size_t w = 0;
  const auto ex = jittered_embedding(x, opt.seed, 1, w);
  const ChebyshevKdTree t(ex, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = std::max(t.kth_neighbor_distance(i, static_cast<std::size_t>(opt.k)), 1e-300);
    acc += std::log(2.0 * eps);
  }
  const double h = digamma_int(n) - digamma_int(static_cast<std::size_t>(opt.k)) +
                   static_cast<double>(w) * acc / static_cast<double>(n);
  return make(h, n, "kozachenko-leonenko", opt.k);
}

EstimateNats cond_entropy(const SampleColumn& y, const SampleColumn& z, const KnnOptions& opt) {
  require_same_length(y.size(), z.size(), "cond_entropy");
  if (y.empty()) throw EstimationError("cond_entropy: empty columns");

  if (y.is_discrete() && z.is_discrete()) {
    const auto ty = tally(y.labels()), tz = tally(z.labels());
    const auto tyz = tally(pair_keys(ty.label, tz.label));
    const auto rep = representatives(tyz);
    const double n = static_cast<double>(y.size());
    double h = 0.0;
    for (std::size_t c = 0; c < tyz.count.size(); ++c) {
      const double cyz = tyz.count[c];
      const double cz = tz.count[static_cast<std::size_t>(tz.label[rep[c]])];
      h += (cyz / n) * std::log(cz / cyz);
    }
    return make(std::max(h, 0.0), y.size(), "plugin-cond-entropy", 0);
  }

  if (y.is_discrete()) {
    const auto hy = entropy_discrete(y);
    auto mi = mi_mixed(z, y, opt);
    EstimateNats out = make(std::max(hy.value - mi.value, 0.0), y.size(), "plugin-entropy-minus-ross", opt.k);
    out.warnings = std::move(mi.warnings);
    return out;
  }

  const auto k = static_cast<std::size_t>(opt.k);
  if (z.is_discrete()) {
    // Stratify on the discrete conditioner.
    const auto tz = tally(z.labels());
    EstimateNats out = make(0.0, 0, "kozachenko-leonenko-stratified", opt.k);
    double acc = 0.0, used = 0.0;
    for (std::size_t c = 0; c < tz.count.size(); ++c) {
      if (tz.count[c] <= static_cast<double>(k)) {
        out.warnings.push_back("stratum " + std::to_string(c) + " has <= k members; skipped");
        continue;
      }
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < y.size(); ++i)
        if (static_cast<std::size_t>(tz.label[i]) == c) rows.push_back(i);
      acc += tz.count[c] * entropy_knn(y.subset(rows), opt).value;
      used += tz.count[c];
    }
    if (used == 0.0) throw EstimationError("cond_entropy: estimation infeasible, every stratum has <= k members");
    out.value = acc / used;
    out.n_samples = static_cast<std::size_t>(used);
    return out;
  }

  // H(Y|Z) = <psi(n_z + 1)> - psi(k) + d_y <ln 2 eps>, radii from the joint space.
  const std::size_t n = y.size();
  check_knn_size(n, opt.k, "cond_entropy");
  std::size_t wy = 0, wz = 0, wj = 0;
  const auto ey = jittered_embedding(y, opt.seed, 2, wy);
  const auto ez = jittered_embedding(z, opt.seed, 3, wz);
  const auto joint = concat_rows({{&ey, wy}, {&ez, wz}}, n, wj);
  const ChebyshevKdTree tj(joint, wj), tz(ez, wz);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = std::max(tj.kth_neighbor_distance(i, k), 1e-300);
    acc += digamma_int(tz.count_closer(i, eps) + 1) + static_cast<double>(wy) * std::log(2.0 * eps);
  }
  return make(acc / static_cast<double>(n) - digamma_int(k), n, "knn-cond-entropy", opt.k);
}

EstimateNats mutual_information(const SampleColumn& x, const SampleColumn& y, const KnnOptions& opt) {
  if (x.is_discrete() && y.is_discrete()) return mi_discrete(x, y);
  if (y.is_discrete()) return mi_mixed(x, y, opt);
  if (x.is_discrete()) return mi_mixed(y, x, opt);
  return mi_ksg(x, y, opt);
}

EstimateNats conditional_mutual_information(const SampleColumn& x, const SampleColumn& y, const SampleColumn& z,
                                            const KnnOptions& opt) {
  if (x.is_discrete() && y.is_discrete() && z.is_discrete()) return cmi_discrete(x, y, z);
  return cmi_knn(x, y, z, opt);
}

EstimateNats entropy(const SampleColumn& x, const KnnOptions& opt) {
  return x.is_discrete() ? entropy_discrete(x) : entropy_knn(x, opt);
}

}  // namespace marlaudit
