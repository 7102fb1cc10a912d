#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace knnlab {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// A numeric CSV table with a header row. Empty fields read as NaN.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

NumericTable read_numeric_csv(const std::filesystem::path& path);
NumericTable parse_numeric_csv(std::string_view text);
std::string to_csv(const NumericTable& table);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string> split(std::string_view text, char delimiter);
std::string_view trim(std::string_view text) noexcept;

}  // namespace knnlab
