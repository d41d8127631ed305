#include "dpvi/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dpvi {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  size_t used = 0;
  double out;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw DomainError("config: key '" + key + "' has non-numeric value '" +
                      value + "'");
  }
  if (used != value.size())
    throw DomainError("config: key '" + key + "' has non-numeric value '" +
                      value + "'");
  return out;
}

long parse_long(const std::string& key, const std::string& value) {
  size_t used = 0;
  long out;
  try {
    out = std::stol(value, &used);
  } catch (const std::exception&) {
    throw DomainError("config: key '" + key + "' has non-integer value '" +
                      value + "'");
  }
  if (used != value.size())
    throw DomainError("config: key '" + key + "' has non-integer value '" +
                      value + "'");
  return out;
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << values[i];
  }
  return out.str();
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config: line " + std::to_string(line_no) + " of '" +
                        path + "' is not a key=value assignment: '" + line +
                        "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw DomainError("config: line " + std::to_string(line_no) + " of '" +
                        path + "' has an empty key");
    cfg.set(key, value);
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
  resolved_.erase(key);
}

void RunConfig::apply_assignment(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw DomainError("config: override '" + assignment +
                      "' is not of the form key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool RunConfig::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = entries_.find(key);
  std::string value = it == entries_.end() ? fallback : it->second;
  resolved_[key] = value;
  return value;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  double value =
      it == entries_.end() ? fallback : parse_double(key, it->second);
  std::ostringstream out;
  out.precision(17);
  out << value;
  resolved_[key] = out.str();
  return value;
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  auto it = entries_.find(key);
  long value = it == entries_.end() ? fallback : parse_long(key, it->second);
  resolved_[key] = std::to_string(value);
  return value;
}

std::vector<long> RunConfig::get_long_list(
    const std::string& key, const std::vector<long>& fallback) const {
  auto it = entries_.find(key);
  std::vector<long> value;
  if (it == entries_.end()) {
    value = fallback;
  } else {
    for (const auto& part : split_commas(it->second))
      value.push_back(parse_long(key, part));
  }
  resolved_[key] = join(value);
  return value;
}

std::vector<double> RunConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = entries_.find(key);
  std::vector<double> value;
  if (it == entries_.end()) {
    value = fallback;
  } else {
    for (const auto& part : split_commas(it->second))
      value.push_back(parse_double(key, part));
  }
  resolved_[key] = join(value);
  return value;
}

std::map<std::string, double> RunConfig::numeric_with_prefix(
    const std::string& prefix) const {
  std::map<std::string, double> out;
  for (const auto& [key, value] : entries_) {
    if (key.rfind(prefix, 0) != 0) continue;
    std::string stripped = key.substr(prefix.size());
    out[stripped] = parse_double(key, value);
    resolved_[key] = value;
  }
  return out;
}

std::string echo_config(const RunConfig& config) {
  // resolved values (defaults included) first, then any untouched
  // explicit entries, all as sorted key=value lines
  std::map<std::string, std::string> merged = config.entries();
  for (const auto& [key, value] : config.resolved()) merged[key] = value;
  std::ostringstream out;
  for (const auto& [key, value] : merged) out << key << '=' << value << '\n';
  return out.str();
}

void ConfigValidator::require(bool ok, const std::string& message) {
  if (!ok) messages_.push_back(message);
}

void ConfigValidator::finish() const {
  if (messages_.empty()) return;
  std::string joined = "config validation failed:";
  for (const auto& m : messages_) joined += "\n  - " + m;
  throw DomainError(joined);
}

}  // namespace dpvi
