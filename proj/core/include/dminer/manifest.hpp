#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dminer {

/// Environment variable that overrides the configured master seed.
inline constexpr const char* kSeedEnvVar = "DEFAULTS_MINER_SEED";

/// Flat `key = value` configuration; '#' starts a comment.
class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  /// Sets only when the key is absent.
  void set_default(const std::string& key, std::string value) { values_.try_emplace(key, std::move(value)); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  /// Comma-separated unsigned list.
  std::vector<std::size_t> get_sizes(const std::string& key, std::vector<std::size_t> fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Sorted `key = value` lines.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// flag > DEFAULTS_MINER_SEED > config "seed" > fallback.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const Config& config, std::uint64_t fallback = 0);

/// Record of one experiment stage. The hash covers everything that
/// determines outputs and excludes versions and timestamps.
struct Manifest {
  std::string command;
  std::uint64_t master_seed = 0;
  Config config;
  std::map<std::string, std::string> datasets;  // name -> content hash
  std::string tool_version;
  std::string created_at;

  std::string hash() const;
  std::string to_json() const;
  static Manifest from_json(const std::string& text);
  static Manifest load(const std::filesystem::path& path);
};

/// Library version string.
const char* version();

/// UTC timestamp in ISO 8601.
std::string utc_timestamp();

}  // namespace dminer
