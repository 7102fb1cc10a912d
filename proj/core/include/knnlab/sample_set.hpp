#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace knnlab {

/// n observations in R^p stored row-major, with optional responses.
class SampleSet {
public:
  /// Throws InvalidData on n == 0, p == 0, non-finite values or a response
  /// vector whose length differs from n.
  SampleSet(std::size_t dimension, std::vector<double> coordinates,
            std::optional<std::vector<double>> responses = std::nullopt);

  std::size_t size() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return p_; }
  bool has_responses() const noexcept { return responses_.has_value(); }

  std::span<const double> row(std::size_t i) const noexcept { return {coordinates_.data() + i * p_, p_}; }
  const double* row_data(std::size_t i) const noexcept { return coordinates_.data() + i * p_; }
  const std::vector<double>& coordinates() const noexcept { return coordinates_; }
  /// Throws MissingResponses when absent.
  const std::vector<double>& responses() const;

  /// Largest Euclidean distance between two opposite corners of the bounding box.
  double bounding_diameter() const noexcept;

private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> coordinates_;
  std::optional<std::vector<double>> responses_;
};

/// CSV with header `x1,...,xp[,y]`.
std::string sample_set_csv(const SampleSet& data);
SampleSet parse_sample_set_csv(std::string_view text);
SampleSet load_sample_set(const std::filesystem::path& path);
void save_sample_set(const SampleSet& data, const std::filesystem::path& path);

/// Evaluation points (header `x1,...,xp`), row-major.
struct PointGrid {
  std::size_t dimension = 0;
  std::vector<double> coordinates;

  std::size_t size() const noexcept { return dimension ? coordinates.size() / dimension : 0; }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coordinates.data() + i * dimension, dimension};
  }
};

PointGrid load_point_grid(const std::filesystem::path& path);

}  // namespace knnlab
