#pragma once

#include "knnlab/sample_set.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace knnlab {

/// Squared Euclidean distance, summed in coordinate order. Every distance in
/// the library goes through this function so that the tree and the
/// brute-force oracle produce bit-identical values.
inline double squared_distance(const double* a, const double* b, std::size_t p) noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

/// k-th nearest neighbor distance R(x) (closed-ball convention) and the k
/// nearest sample ids ordered by (distance, index).
struct RadiusResult {
  double radius = 0.0;
  std::vector<std::size_t> neighbor_ids;
};

/// Immutable kd-tree over the rows of a SampleSet for exact k-NN queries.
/// The index refers to the sample set, which must outlive it. Queries are
/// const and may run concurrently.
class NeighborIndex {
public:
  static constexpr std::size_t kDefaultLeafSize = 16;

  explicit NeighborIndex(const SampleSet& data, std::size_t leaf_size = kDefaultLeafSize);
  NeighborIndex(SampleSet&&, std::size_t = kDefaultLeafSize) = delete;

  const SampleSet& data() const noexcept { return *data_; }
  std::size_t size() const noexcept { return data_->size(); }
  std::size_t dimension() const noexcept { return data_->dimension(); }
  std::size_t leaf_size() const noexcept { return leaf_size_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Exact k-NN query. Unlike knn_radius, a zero radius is returned as is.
  RadiusResult query(std::span<const double> x, std::size_t k) const;

private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  double box_distance2(std::size_t node, const double* x) const noexcept;

  const SampleSet* data_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Builds the index; throws InvalidData for leaf_size == 0.
NeighborIndex build_index(const SampleSet& data, std::size_t leaf_size = NeighborIndex::kDefaultLeafSize);

/// R(x) through the tree. Throws NotEnoughPoints for k > n and
/// DegenerateRadius when R(x) == 0.
RadiusResult knn_radius(const NeighborIndex& index, std::span<const double> x, std::size_t k);

/// O(n) oracle with the same contract as knn_radius.
RadiusResult knn_radius_bruteforce(const SampleSet& data, std::span<const double> x, std::size_t k);

/// Brute-force query without the degenerate-radius check.
RadiusResult knn_query_bruteforce(const SampleSet& data, std::span<const double> x, std::size_t k);

}  // namespace knnlab
