#include "dminer/manifest.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/dataset_io.hpp"
#include "dminer/error.hpp"
#include "dminer/random.hpp"

namespace dminer {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ConfigError(field, fmt::format("expected a non-negative integer, got '{}'", text));
  return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("line {}", line_no), fmt::format("expected 'key = value', got '{}'", line));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("line {}", line_no), "empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) { return parse(read_text(path)); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_u64(key, it->second);
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, fmt::format("expected a number, got '{}'", it->second));
  }
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, std::vector<std::size_t> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::size_t> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(static_cast<std::size_t>(parse_u64(key, trim(item))));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += fmt::format("{} = {}\n", k, v);
  return out;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const Config& config, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnvVar); env && *env) return parse_u64(kSeedEnvVar, env);
  return config.get_u64("seed", fallback);
}

std::string Manifest::hash() const {
  std::string canonical = fmt::format("command={}\nseed={}\n", command, master_seed);
  canonical += config.to_text();
  for (const auto& [name, h] : datasets) canonical += fmt::format("dataset {}={}\n", name, h);
  return to_hex(fnv1a(canonical));
}

std::string Manifest::to_json() const {
  ordered_json j;
  j["schema_version"] = 1;
  j["manifest_hash"] = hash();
  j["command"] = command;
  j["master_seed"] = master_seed;
  j["config"] = config.values();
  j["datasets"] = datasets;
  j["tool_version"] = tool_version;
  j["created_at"] = created_at;
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    if (j.value("schema_version", 0) != 1) throw DataError("manifest: unsupported schema_version");
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.config = Config(j.at("config").get<std::map<std::string, std::string>>());
    m.datasets = j.at("datasets").get<std::map<std::string, std::string>>();
    m.tool_version = j.value("tool_version", std::string{});
    m.created_at = j.value("created_at", std::string{});
    if (j.contains("manifest_hash") && j["manifest_hash"].get<std::string>() != m.hash())
      throw DataError("manifest: stored hash does not match its contents");
    return m;
  } catch (const ordered_json::exception& e) {
    throw DataError(fmt::format("manifest: {}", e.what()));
  }
}

Manifest Manifest::load(const std::filesystem::path& path) { return from_json(read_text(path)); }

const char* version() { return "0.1.0"; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec);
}

}  // namespace dminer
