#include "knnlab/sample_set.hpp"

#include "knnlab/csv.hpp"
#include "knnlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace knnlab {

SampleSet::SampleSet(std::size_t dimension, std::vector<double> coordinates,
                     std::optional<std::vector<double>> responses)
    : p_(dimension), coordinates_(std::move(coordinates)), responses_(std::move(responses)) {
  if (p_ == 0) {
    throw InvalidData("sample dimension must be >= 1");
  }
  if (coordinates_.empty()) {
    throw InvalidData("sample set is empty");
  }
  if (coordinates_.size() % p_ != 0) {
    throw InvalidData("coordinate count is not a multiple of the dimension");
  }
  n_ = coordinates_.size() / p_;
  if (!std::all_of(coordinates_.begin(), coordinates_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidData("sample coordinates must be finite");
  }
  if (responses_) {
    if (responses_->size() != n_) {
      throw InvalidData("response count " + std::to_string(responses_->size()) +
                        " differs from sample size " + std::to_string(n_));
    }
    if (!std::all_of(responses_->begin(), responses_->end(), [](double v) { return std::isfinite(v); })) {
      throw InvalidData("responses must be finite");
    }
  }
}

const std::vector<double>& SampleSet::responses() const {
  if (!responses_) {
    throw MissingResponses("sample set has no responses");
  }
  return *responses_;
}

double SampleSet::bounding_diameter() const noexcept {
  double squared = 0.0;
  for (std::size_t j = 0; j < p_; ++j) {
    double lo = coordinates_[j];
    double hi = lo;
    for (std::size_t i = 1; i < n_; ++i) {
      lo = std::min(lo, coordinates_[i * p_ + j]);
      hi = std::max(hi, coordinates_[i * p_ + j]);
    }
    squared += (hi - lo) * (hi - lo);
  }
  return std::sqrt(squared);
}

std::string sample_set_csv(const SampleSet& data) {
  NumericTable table;
  for (std::size_t j = 0; j < data.dimension(); ++j) {
    table.header.push_back("x" + std::to_string(j + 1));
  }
  if (data.has_responses()) {
    table.header.emplace_back("y");
  }
  table.rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.row(i);
    std::vector<double> values(row.begin(), row.end());
    if (data.has_responses()) {
      values.push_back(data.responses()[i]);
    }
    table.rows.push_back(std::move(values));
  }
  return to_csv(table);
}

namespace {

std::size_t coordinate_columns(const std::vector<std::string>& header, bool allow_response) {
  std::size_t p = 0;
  while (p < header.size() && header[p] == "x" + std::to_string(p + 1)) {
    ++p;
  }
  if (p == 0) {
    throw ParseError("CSV header must start with x1");
  }
  const std::size_t rest = header.size() - p;
  if (rest == 0 || (allow_response && rest == 1 && header.back() == "y")) {
    return p;
  }
  throw ParseError("unexpected CSV column '" + header[p] + "'");
}

SampleSet from_table(const NumericTable& table) {
  const std::size_t p = coordinate_columns(table.header, true);
  const bool with_y = table.header.size() == p + 1;
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(table.rows.size() * p);
  for (const auto& row : table.rows) {
    x.insert(x.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(p));
    if (with_y) {
      y.push_back(row[p]);
    }
  }
  if (with_y) {
    return SampleSet(p, std::move(x), std::move(y));
  }
  return SampleSet(p, std::move(x));
}

}  // namespace

SampleSet parse_sample_set_csv(std::string_view text) {
  return from_table(parse_numeric_csv(text));
}

SampleSet load_sample_set(const std::filesystem::path& path) {
  return from_table(read_numeric_csv(path));
}

void save_sample_set(const SampleSet& data, const std::filesystem::path& path) {
  write_text_file(path, sample_set_csv(data));
}

PointGrid load_point_grid(const std::filesystem::path& path) {
  const NumericTable table = read_numeric_csv(path);
  PointGrid grid;
  grid.dimension = coordinate_columns(table.header, false);
  for (const auto& row : table.rows) {
    grid.coordinates.insert(grid.coordinates.end(), row.begin(), row.end());
  }
  if (grid.size() == 0) {
    throw InvalidData("evaluation grid is empty");
  }
  return grid;
}

}  // namespace knnlab
