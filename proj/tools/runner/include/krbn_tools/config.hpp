#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace krbn::tools {

using json = nlohmann::json;

// Malformed or invalid configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Read access to one JSON object that remembers which keys were consumed.
// finish() rejects every key that was never asked for, naming it by its
// dotted path, so misspellings cannot silently fall back to defaults.
class ConfigObject {
 public:
  ConfigObject(const json& j, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key, double def);
  double number(const std::string& key);
  long long integer(const std::string& key, long long def);
  bool boolean(const std::string& key, bool def);
  std::string string(const std::string& key, const std::string& def);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& def);
  std::vector<int> integers(const std::string& key, const std::vector<int>& def);
  std::vector<std::vector<double>> rows(const std::string& key, const std::vector<std::vector<double>>& def);
  // Nested object; an absent key yields an empty object.
  ConfigObject object(const std::string& key);
  // Nested array of objects.
  std::vector<ConfigObject> objects(const std::string& key);
  const json& raw(const std::string& key);

  void finish() const;
  std::string where(const std::string& key) const;

 private:
  const json* lookup(const std::string& key);
  static const json& empty_object();
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

// Parses a file; syntax errors and missing files become ConfigError.
json load_config_file(const std::string& path);

}  // namespace krbn::tools
