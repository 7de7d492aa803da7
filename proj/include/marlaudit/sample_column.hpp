#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace marlaudit {

enum class ColumnKind { Discrete, Continuous };

// n paired samples of one random variable. Discrete columns carry integer
// labels plus the embedding used when they enter a kNN metric space (one-hot
// by default, or the original integer rows). Continuous columns are row-major
// real vectors of fixed width with finite components.
class SampleColumn {
 public:
  SampleColumn() = default;

  static SampleColumn discrete(std::vector<std::int64_t> labels);
  static SampleColumn continuous(std::vector<double> values, std::size_t width);
  // Integer-valued rows become Discrete (embedding = the rows themselves);
  // anything else becomes Continuous. Throws EstimationError on NaN/Inf.
  static SampleColumn from_rows(std::vector<double> values, std::size_t width);
  // Pairs two columns into one variable: Discrete if both are, else Continuous
  // over the concatenated embeddings.
  static SampleColumn join(const SampleColumn& a, const SampleColumn& b);

  ColumnKind kind() const { return kind_; }
  bool is_discrete() const { return kind_ == ColumnKind::Discrete; }
  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  std::span<const std::int64_t> labels() const { return labels_; }
  // Continuous values (row-major, width() per row).
  std::span<const double> values() const { return values_; }
  std::size_t width() const { return width_; }

  // Row-major coordinates for kNN estimation; sets `width`.
  std::vector<double> embedding(std::size_t& width) const;

  SampleColumn subset(std::span<const std::size_t> rows) const;

 private:
  ColumnKind kind_ = ColumnKind::Discrete;
  std::size_t n_ = 0;
  std::size_t width_ = 0;              // continuous width, or embedding width for row-embedded labels
  std::vector<std::int64_t> labels_;   // discrete
  std::vector<double> values_;         // continuous values or discrete row embedding
};

// Dense relabelling to 0..k-1 in order of first appearance of sorted label values.
std::vector<std::int64_t> dense_labels(std::span<const std::int64_t> labels, std::int64_t* n_distinct = nullptr);

}  // namespace marlaudit
