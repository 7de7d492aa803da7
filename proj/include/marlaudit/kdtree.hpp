#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace marlaudit {

// Static k-d tree over row-major points under the max-norm. Queries are by
// point index and never count the query point itself.
class ChebyshevKdTree {
 public:
  ChebyshevKdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size = 12);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  // Distance from point i to its k-th nearest other point (k >= 1, k < size()).
  double kth_neighbor_distance(std::size_t i, std::size_t k) const;
  // Number of other points strictly closer than r to point i.
  std::size_t count_closer(std::size_t i, double r) const;
  // Number of other points within distance r (inclusive) of point i.
  std::size_t count_within(std::size_t i, double r) const;

 private:
  struct Node {
    std::size_t begin, end;  // range into order_
    std::size_t left = 0, right = 0;  // child node ids, 0 = leaf
  };

  double point_distance(const double* a, const double* b) const;
  std::size_t build(std::size_t begin, std::size_t end);
  template <bool Strict>
  std::size_t count(const double* q, double r) const;

  std::vector<double> pts_;  // reordered copy, row-major
  std::vector<std::size_t> order_;     // tree position -> original index
  std::vector<std::size_t> position_;  // original index -> tree position
  std::vector<Node> nodes_;
  std::vector<double> lo_, hi_;  // per-node bounding boxes
  std::size_t n_ = 0, dim_ = 0, leaf_size_;
};

}  // namespace marlaudit
