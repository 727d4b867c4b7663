#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace currentlab {

/// Flat "key = value" configuration. Lines starting with '#' are comments;
/// lists are comma separated. Every getter records the key as used, so
/// misspelled keys can be reported.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string str(const std::string& key, const std::string& fallback) const;
  std::string str(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::int64_t integer(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::vector<int> ints(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<int> ints(const std::string& key) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::string origin_;
  mutable std::map<std::string, bool> used_;
};

}  // namespace currentlab
