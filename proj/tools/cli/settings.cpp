#include "settings.hpp"

#include "knnlab/csv.hpp"
#include "knnlab/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace knnlab::cli {

Settings::Settings(std::map<std::string, std::string> defaults) : values_(std::move(defaults)) {}

void Settings::set(const std::string& key, std::string value) {
  if (!values_.contains(key)) {
    throw ConfigError(key, "unknown key");
  }
  values_[key] = std::move(value);
}

void Settings::merge_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(trim(assignment)), "expected key=value");
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

void Settings::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open " + path.string());
  }
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    if (!trim(view).empty()) {
      merge_assignment(view);
    }
  }
}

bool Settings::has(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& Settings::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(key, "unknown key");
  }
  return it->second;
}

double Settings::real(const std::string& key) const {
  const std::string& value = text(key);
  if (value.empty()) {
    throw ConfigError(key, "value required");
  }
  try {
    return parse_double(value);
  } catch (const ParseError&) {
    throw ConfigError(key, "'" + value + "' is not a number");
  }
}

std::optional<double> Settings::optional_real(const std::string& key) const {
  if (!has(key)) {
    return std::nullopt;
  }
  return real(key);
}

std::int64_t Settings::integer(const std::string& key) const {
  const std::string& value = text(key);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(key, "'" + value + "' is not an integer");
  }
  return out;
}

std::uint64_t Settings::unsigned_integer(const std::string& key) const {
  const std::int64_t value = integer(key);
  if (value < 0) {
    throw ConfigError(key, "must be nonnegative");
  }
  return static_cast<std::uint64_t>(value);
}

std::vector<double> Settings::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(text(key), ',')) {
    try {
      out.push_back(parse_double(trim(part)));
    } catch (const ParseError&) {
      throw ConfigError(key, "'" + part + "' is not a number");
    }
  }
  return out;
}

std::string Settings::render() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) {
    out << key << '=' << value << '\n';
  }
  return out.str();
}

}  // namespace knnlab::cli
