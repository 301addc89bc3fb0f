#include "vibeam/config.hpp"

#include <fstream>
#include <sstream>

#include "vibeam/util.hpp"

namespace vibeam {

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Config cfg = from_string(buf.str());
  int version = cfg.get_int("config_version", 1);
  if (version != 1) throw ValidationError("unsupported config_version in " + path);
  return cfg;
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto pos = s.find('=');
    if (pos == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + " is not key = value");
    std::string key = trim(s.substr(0, pos));
    std::string value = trim(s.substr(pos + 1));
    if (key.empty()) throw ValidationError("empty config key at line " + std::to_string(lineno));
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("missing config key: " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(get_string(key));
  } catch (const std::invalid_argument&) {
    throw ValidationError("config key " + key + " is not a number");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  try {
    return std::stoi(get_string(key));
  } catch (const std::invalid_argument&) {
    throw ValidationError("config key " + key + " is not an integer");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key " + key + " is not a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split(get_string(key), ',')) {
    std::string s = trim(item);
    if (s.empty()) continue;
    try {
      out.push_back(std::stod(s));
    } catch (const std::invalid_argument&) {
      throw ValidationError("config key " + key + " has a non-numeric entry");
    }
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (double v : get_doubles(key, {})) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::string> out;
  for (const auto& item : split(get_string(key), ',')) {
    std::string s = trim(item);
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

}  // namespace vibeam
