#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace knnlab::cli {

/// Validation failure tied to one configuration key (exit status 2).
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Resolved key=value settings for one subcommand. Later sources override
/// earlier ones: defaults, config file, --set, dedicated flags.
class Settings {
public:
  explicit Settings(std::map<std::string, std::string> defaults);

  /// Reads `key = value` lines; `#` starts a comment.
  void merge_file(const std::filesystem::path& path);
  /// Parses `key=value`.
  void merge_assignment(std::string_view assignment);
  void set(const std::string& key, std::string value);

  bool has(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  std::optional<double> optional_real(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  /// Sorted key=value lines.
  std::string render() const;

private:
  std::map<std::string, std::string> values_;
};

}  // namespace knnlab::cli
