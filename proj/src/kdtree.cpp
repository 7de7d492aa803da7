#include "marlaudit/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace marlaudit {

ChebyshevKdTree::ChebyshevKdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size)
    : n_(dim ? points.size() / dim : 0), dim_(dim), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (dim == 0 || points.size() % dim != 0) throw std::invalid_argument("kd-tree: bad point layout");
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  pts_.assign(points.begin(), points.end());
  nodes_.reserve(2 * n_ / leaf_size_ + 2);
  if (n_ > 0) build(0, n_);

  // Reorder the coordinates to tree order so leaf scans are contiguous.
  std::vector<double> reordered(pts_.size());
  position_.resize(n_);
  for (std::size_t p = 0; p < n_; ++p) {
    std::copy_n(points.data() + order_[p] * dim_, dim_, reordered.data() + p * dim_);
    position_[order_[p]] = p;
  }
  pts_ = std::move(reordered);
}

std::size_t ChebyshevKdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end});
  lo_.resize((id + 1) * dim_);
  hi_.resize((id + 1) * dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t p = begin; p < end; ++p) {
      const double v = pts_[order_[p] * dim_ + d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    lo_[id * dim_ + d] = lo;
    hi_[id * dim_ + d] = hi;
  }
  if (end - begin <= leaf_size_) return id;

  std::size_t split = 0;
  double widest = -1.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    const double w = hi_[id * dim_ + d] - lo_[id * dim_ + d];
    if (w > widest) {
      widest = w;
      split = d;
    }
  }
  if (widest <= 0.0) return id;  // all points identical

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     return pts_[a * dim_ + split] < pts_[b * dim_ + split];
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double ChebyshevKdTree::point_distance(const double* a, const double* b) const {
  double d = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double ChebyshevKdTree::kth_neighbor_distance(std::size_t i, std::size_t k) const {
  if (k == 0 || k >= n_) throw std::invalid_argument("kd-tree: need 1 <= k < n");
  const std::size_t self = position_.at(i);
  const double* q = pts_.data() + self * dim_;

  std::priority_queue<double> best;  // max-heap of the k smallest distances so far
  auto bound = [&] { return best.size() < k ? std::numeric_limits<double>::infinity() : best.top(); };

  auto box_min = [&](std::size_t node) {
    double d = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double lo = lo_[node * dim_ + c], hi = hi_[node * dim_ + c];
      d = std::max(d, std::max(lo - q[c], q[c] - hi));
    }
    return d;
  };

  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (box_min(id) > bound()) continue;
    const Node& nd = nodes_[id];
    if (nd.left == 0) {
      for (std::size_t p = nd.begin; p < nd.end; ++p) {
        if (p == self) continue;
        const double d = point_distance(q, pts_.data() + p * dim_);
        if (best.size() < k) {
          best.push(d);
        } else if (d < best.top()) {
          best.pop();
          best.push(d);
        }
      }
      continue;
    }
    // Visit the nearer child first.
    const double dl = box_min(nd.left), dr = box_min(nd.right);
    if (dl <= dr) {
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    } else {
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  return best.top();
}

template <bool Strict>
std::size_t ChebyshevKdTree::count(const double* q, double r) const {
  auto inside = [r](double d) { return Strict ? d < r : d <= r; };
  std::size_t total = 0;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    double dmin = 0.0, dmax = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double lo = lo_[id * dim_ + c], hi = hi_[id * dim_ + c];
      dmin = std::max(dmin, std::max(lo - q[c], q[c] - hi));
      dmax = std::max(dmax, std::max(std::abs(q[c] - lo), std::abs(hi - q[c])));
    }
    if (!inside(dmin)) continue;
    const Node& nd = nodes_[id];
    if (inside(dmax)) {
      total += nd.end - nd.begin;
      continue;
    }
    if (nd.left == 0) {
      for (std::size_t p = nd.begin; p < nd.end; ++p)
        if (inside(point_distance(q, pts_.data() + p * dim_))) ++total;
      continue;
    }
    stack.push_back(nd.left);
    stack.push_back(nd.right);
  }
  return total;
}

std::size_t ChebyshevKdTree::count_closer(std::size_t i, double r) const {
  const std::size_t self = position_.at(i);
  const std::size_t c = count<true>(pts_.data() + self * dim_, r);
  return r > 0.0 ? c - 1 : c;
}

std::size_t ChebyshevKdTree::count_within(std::size_t i, double r) const {
  const std::size_t self = position_.at(i);
  return count<false>(pts_.data() + self * dim_, r) - 1;
}

}  // namespace marlaudit
