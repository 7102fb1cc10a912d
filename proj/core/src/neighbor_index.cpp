#include "knnlab/neighbor_index.hpp"

#include "knnlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace knnlab {

namespace {

using Candidate = std::pair<double, std::size_t>;  // (squared distance, index)

void validate_query(std::span<const double> x, std::size_t k, std::size_t n, std::size_t p) {
  if (x.size() != p) {
    throw DimensionMismatch("query of dimension " + std::to_string(x.size()) +
                            " against samples of dimension " + std::to_string(p));
  }
  for (const double v : x) {
    if (!std::isfinite(v)) {
      throw InvalidData("query point must be finite");
    }
  }
  if (k == 0) {
    throw PreconditionFailed("k must be >= 1");
  }
  if (k > n) {
    throw NotEnoughPoints("k = " + std::to_string(k) + " exceeds the sample size " + std::to_string(n));
  }
}

RadiusResult finish(std::vector<Candidate> best) {
  std::sort(best.begin(), best.end());
  RadiusResult result;
  result.radius = std::sqrt(best.back().first);
  result.neighbor_ids.reserve(best.size());
  for (const auto& c : best) {
    result.neighbor_ids.push_back(c.second);
  }
  return result;
}

RadiusResult check_degenerate(RadiusResult result) {
  if (result.radius == 0.0) {
    throw DegenerateRadius(result.radius);
  }
  return result;
}

}  // namespace

NeighborIndex::NeighborIndex(const SampleSet& data, std::size_t leaf_size) : data_(&data), leaf_size_(leaf_size) {
  if (leaf_size_ == 0) {
    throw InvalidData("leaf_size must be >= 1");
  }
  if (data.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidData("sample set too large for the index");
  }
  const auto n = static_cast<std::uint32_t>(data.size());
  order_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    order_[i] = i;
  }
  nodes_.reserve(2 * (n / leaf_size_ + 1));
  build(0, n);
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  const std::size_t p = data_->dimension();
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1});
  lower_.resize(lower_.size() + p, std::numeric_limits<double>::infinity());
  upper_.resize(upper_.size() + p, -std::numeric_limits<double>::infinity());
  double* lo = lower_.data() + static_cast<std::size_t>(id) * p;
  double* hi = upper_.data() + static_cast<std::size_t>(id) * p;
  for (std::uint32_t i = begin; i < end; ++i) {
    const double* row = data_->row_data(order_[i]);
    for (std::size_t j = 0; j < p; ++j) {
      lo[j] = std::min(lo[j], row[j]);
      hi[j] = std::max(hi[j], row[j]);
    }
  }
  if (end - begin <= leaf_size_) {
    return id;
  }
  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (hi[j] - lo[j] > widest) {
      widest = hi[j] - lo[j];
      axis = j;
    }
  }
  if (widest <= 0.0) {
    return id;  // all points coincide
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  const SampleSet& data = *data_;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = data.row_data(a)[axis];
                     const double vb = data.row_data(b)[axis];
                     return va < vb || (va == vb && a < b);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

// Never exceeds the squared distance to any point in the box: each term is a
// monotone function of a coordinate gap bounded by the true gap.
double NeighborIndex::box_distance2(std::size_t node, const double* x) const noexcept {
  const std::size_t p = data_->dimension();
  const double* lo = lower_.data() + node * p;
  const double* hi = upper_.data() + node * p;
  double sum = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double d = 0.0;
    if (x[j] < lo[j]) {
      d = lo[j] - x[j];
    } else if (x[j] > hi[j]) {
      d = x[j] - hi[j];
    }
    sum += d * d;
  }
  return sum;
}

RadiusResult NeighborIndex::query(std::span<const double> x, std::size_t k) const {
  const std::size_t p = data_->dimension();
  validate_query(x, k, data_->size(), p);
  std::vector<Candidate> heap;
  heap.reserve(k + 1);

  auto consider = [&](std::size_t i) {
    const Candidate c{squared_distance(data_->row_data(i), x.data(), p), i};
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  };
  // Ties at equal distance may still improve the (distance, index) order, so
  // only strictly farther boxes are pruned.
  auto prunable = [&](double bound) { return heap.size() == k && bound > heap.front().first; };

  std::vector<std::pair<double, std::int32_t>> stack;
  stack.emplace_back(box_distance2(0, x.data()), 0);
  while (!stack.empty()) {
    const auto [bound, id] = stack.back();
    stack.pop_back();
    if (prunable(bound)) {
      continue;
    }
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        consider(order_[i]);
      }
      continue;
    }
    const double left_bound = box_distance2(static_cast<std::size_t>(node.left), x.data());
    const double right_bound = box_distance2(static_cast<std::size_t>(node.right), x.data());
    // Push the farther child first so the nearer one is explored next.
    if (left_bound <= right_bound) {
      stack.emplace_back(right_bound, node.right);
      stack.emplace_back(left_bound, node.left);
    } else {
      stack.emplace_back(left_bound, node.left);
      stack.emplace_back(right_bound, node.right);
    }
  }
  return finish(std::move(heap));
}

NeighborIndex build_index(const SampleSet& data, std::size_t leaf_size) {
  return NeighborIndex(data, leaf_size);
}

RadiusResult knn_radius(const NeighborIndex& index, std::span<const double> x, std::size_t k) {
  return check_degenerate(index.query(x, k));
}

RadiusResult knn_query_bruteforce(const SampleSet& data, std::span<const double> x, std::size_t k) {
  const std::size_t p = data.dimension();
  validate_query(x, k, data.size(), p);
  std::vector<Candidate> all(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    all[i] = {squared_distance(data.row_data(i), x.data(), p), i};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return finish(std::move(all));
}

RadiusResult knn_radius_bruteforce(const SampleSet& data, std::span<const double> x, std::size_t k) {
  return check_degenerate(knn_query_bruteforce(data, x, k));
}

}  // namespace knnlab
