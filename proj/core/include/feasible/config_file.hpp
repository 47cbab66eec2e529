#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace feasible {

/// A flat `key = value` file. Blank lines and `#` comments are ignored;
/// keys may be dotted (`trainer.epochs`); values may be double-quoted.
/// Lists are comma separated. Every lookup marks the key as used so that
/// leftover (unknown) keys can be reported with their line.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  /// Throws ConfigError on malformed lines and duplicate keys.
  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line(const std::string& key) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;
  std::vector<long long> get_int_list(const std::string& key,
                                      std::vector<long long> fallback) const;

  /// Throws ConfigError naming the first key (in file order) never looked up.
  void reject_unused() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace feasible
