#include "marlaudit/sample_column.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "marlaudit/errors.hpp"

namespace marlaudit {

std::vector<std::int64_t> dense_labels(std::span<const std::int64_t> labels, std::int64_t* n_distinct) {
  std::vector<std::int64_t> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::int64_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = std::lower_bound(sorted.begin(), sorted.end(), labels[i]) - sorted.begin();
  if (n_distinct) *n_distinct = static_cast<std::int64_t>(sorted.size());
  return out;
}

SampleColumn SampleColumn::discrete(std::vector<std::int64_t> labels) {
  SampleColumn c;
  c.kind_ = ColumnKind::Discrete;
  c.n_ = labels.size();
  c.labels_ = std::move(labels);
  return c;
}

SampleColumn SampleColumn::continuous(std::vector<double> values, std::size_t width) {
  if (width == 0 || values.size() % width != 0) throw EstimationError("continuous column: ragged rows");
  for (double v : values)
    if (!std::isfinite(v)) throw EstimationError("continuous column: non-finite component");
  SampleColumn c;
  c.kind_ = ColumnKind::Continuous;
  c.width_ = width;
  c.n_ = values.size() / width;
  c.values_ = std::move(values);
  return c;
}

SampleColumn SampleColumn::from_rows(std::vector<double> values, std::size_t width) {
  if (width == 0 || values.size() % width != 0) throw EstimationError("column: ragged rows");
  bool integral = true;
  for (double v : values) {
    if (!std::isfinite(v)) throw EstimationError("column: non-finite component");
    if (v != std::floor(v) || std::abs(v) > 1e15) integral = false;
  }
  if (!integral) return continuous(std::move(values), width);

  const std::size_t n = values.size() / width;
  std::map<std::vector<double>, std::int64_t> ids;
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].assign(values.begin() + static_cast<std::ptrdiff_t>(i * width),
                   values.begin() + static_cast<std::ptrdiff_t>((i + 1) * width));
    ids.emplace(rows[i], 0);
  }
  std::int64_t next = 0;
  for (auto& [row, id] : ids) id = next++;
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = ids.at(rows[i]);

  SampleColumn c = discrete(std::move(labels));
  c.width_ = width;
  c.values_ = std::move(values);
  return c;
}

SampleColumn SampleColumn::join(const SampleColumn& a, const SampleColumn& b) {
  if (a.size() != b.size()) throw EstimationError("join: length mismatch");
  std::size_t wa = 0, wb = 0;
  const auto ea = a.embedding(wa), eb = b.embedding(wb);
  const std::size_t n = a.size();
  std::vector<double> rows(n * (wa + wb));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(ea.data() + i * wa, wa, rows.data() + i * (wa + wb));
    std::copy_n(eb.data() + i * wb, wb, rows.data() + i * (wa + wb) + wa);
  }
  if (!(a.is_discrete() && b.is_discrete())) return continuous(std::move(rows), wa + wb);

  std::int64_t nb = 0;
  const auto la = dense_labels(a.labels_), lb = dense_labels(b.labels_, &nb);
  std::vector<std::int64_t> pair(n);
  for (std::size_t i = 0; i < n; ++i) pair[i] = la[i] * nb + lb[i];
  SampleColumn c = discrete(dense_labels(pair));
  c.width_ = wa + wb;
  c.values_ = std::move(rows);
  return c;
}

std::vector<double> SampleColumn::embedding(std::size_t& width) const {
  if (kind_ == ColumnKind::Continuous || !values_.empty()) {
    width = width_;
    return values_;
  }
  // One-hot with unit spacing: distinct labels sit at max-norm distance 1.
  std::int64_t k = 0;
  const auto dense = dense_labels(labels_, &k);
  width = static_cast<std::size_t>(std::max<std::int64_t>(k, 1));
  std::vector<double> out(n_ * width, 0.0);
  for (std::size_t i = 0; i < n_; ++i) out[i * width + static_cast<std::size_t>(dense[i])] = 1.0;
  return out;
}

SampleColumn SampleColumn::subset(std::span<const std::size_t> rows) const {
  SampleColumn c;
  c.kind_ = kind_;
  c.n_ = rows.size();
  c.width_ = width_;
  if (!labels_.empty()) {
    c.labels_.reserve(rows.size());
    for (auto r : rows) c.labels_.push_back(labels_.at(r));
  }
  if (!values_.empty()) {
    c.values_.reserve(rows.size() * width_);
    for (auto r : rows)
      c.values_.insert(c.values_.end(), values_.begin() + static_cast<std::ptrdiff_t>(r * width_),
                       values_.begin() + static_cast<std::ptrdiff_t>((r + 1) * width_));
  }
  return c;
}

}  // namespace marlaudit
