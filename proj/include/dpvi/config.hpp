#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpvi/vec.hpp"

namespace dpvi {

// Flat key=value configuration: one assignment per line, '#' comments,
// later assignments win.  Typed getters record the resolved value
// (explicit or default) so the effective configuration can be echoed
// verbatim into output metadata.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  // "key=value" form used by command-line overrides
  void apply_assignment(const std::string& assignment);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::vector<long> get_long_list(const std::string& key,
                                  const std::vector<long>& fallback) const;
  std::vector<double> get_double_list(
      const std::string& key, const std::vector<double>& fallback) const;

  // numeric entries whose key starts with `prefix`, with the prefix
  // stripped (problem parameters)
  std::map<std::string, double> numeric_with_prefix(
      const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }
  // every key touched by a getter with the value actually used
  const std::map<std::string, std::string>& resolved() const {
    return resolved_;
  }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, std::string> resolved_;
};

// sorted "key=value" lines of the resolved configuration
std::string echo_config(const RunConfig& config);

// Accumulates validation failures so a bad configuration reports every
// violated constraint at once.
class ConfigValidator {
 public:
  void require(bool ok, const std::string& message);
  bool ok() const { return messages_.empty(); }
  const std::vector<std::string>& messages() const { return messages_; }
  // throws DomainError listing all failures
  void finish() const;

 private:
  std::vector<std::string> messages_;
};

}  // namespace dpvi
