#include "krbn_tools/config.hpp"

#include <cmath>
#include <fstream>

namespace krbn::tools {

ConfigObject::ConfigObject(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ConfigError("expected an object at '" + (path_.empty() ? "<root>" : path_) + "'");
}

const json& ConfigObject::empty_object() {
  static const json e = json::object();
  return e;
}

std::string ConfigObject::where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool ConfigObject::has(const std::string& key) const { return j_->contains(key) && !(*j_)[key].is_null(); }

const json* ConfigObject::lookup(const std::string& key) {
  used_.insert(key);
  if (!has(key)) return nullptr;
  return &(*j_)[key];
}

double ConfigObject::number(const std::string& key, double def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError("expected a number at '" + where(key) + "'");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError("non-finite number at '" + where(key) + "'");
  return x;
}

double ConfigObject::number(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required key '" + where(key) + "'");
  return number(key, 0.0);
}

long long ConfigObject::integer(const std::string& key, long long def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_number_integer()) throw ConfigError("expected an integer at '" + where(key) + "'");
  return v->get<long long>();
}

bool ConfigObject::boolean(const std::string& key, bool def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_boolean()) throw ConfigError("expected true or false at '" + where(key) + "'");
  return v->get<bool>();
}

std::string ConfigObject::string(const std::string& key, const std::string& def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_string()) throw ConfigError("expected a string at '" + where(key) + "'");
  return v->get<std::string>();
}

std::vector<double> ConfigObject::numbers(const std::string& key, const std::vector<double>& def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (v->is_number()) return {v->get<double>()};
  if (!v->is_array()) throw ConfigError("expected an array of numbers at '" + where(key) + "'");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ConfigError("expected an array of numbers at '" + where(key) + "'");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> ConfigObject::integers(const std::string& key, const std::vector<int>& def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_array()) throw ConfigError("expected an array of integers at '" + where(key) + "'");
  std::vector<int> out;
  for (const auto& e : *v) {
    if (!e.is_number_integer()) throw ConfigError("expected an array of integers at '" + where(key) + "'");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<std::vector<double>> ConfigObject::rows(const std::string& key,
                                                    const std::vector<std::vector<double>>& def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_array()) throw ConfigError("expected an array of arrays at '" + where(key) + "'");
  std::vector<std::vector<double>> out;
  for (const auto& r : *v) {
    if (r.is_number()) {
      out.push_back({r.get<double>()});
      continue;
    }
    if (!r.is_array()) throw ConfigError("expected an array of arrays at '" + where(key) + "'");
    std::vector<double> row;
    for (const auto& e : r) {
      if (!e.is_number()) throw ConfigError("expected numbers inside '" + where(key) + "'");
      row.push_back(e.get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

ConfigObject ConfigObject::object(const std::string& key) {
  const json* v = lookup(key);
  if (!v) return ConfigObject(empty_object(), where(key));
  return ConfigObject(*v, where(key));
}

std::vector<ConfigObject> ConfigObject::objects(const std::string& key) {
  const json* v = lookup(key);
  std::vector<ConfigObject> out;
  if (!v) return out;
  if (!v->is_array()) throw ConfigError("expected an array of objects at '" + where(key) + "'");
  for (std::size_t i = 0; i < v->size(); ++i) out.emplace_back((*v)[i], where(key) + "[" + std::to_string(i) + "]");
  return out;
}

const json& ConfigObject::raw(const std::string& key) {
  const json* v = lookup(key);
  if (!v) throw ConfigError("missing required key '" + where(key) + "'");
  return *v;
}

void ConfigObject::finish() const {
  for (auto it = j_->begin(); it != j_->end(); ++it)
    if (!used_.count(it.key())) throw ConfigError("unknown key '" + where(it.key()) + "'");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace krbn::tools
