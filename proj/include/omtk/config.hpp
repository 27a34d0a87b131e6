#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "omtk/error.hpp"
#include "omtk/system.hpp"

namespace omtk {

/// Problem file: one `key = value` per line, `#` starts a comment.
///
///   preset  = paper-ex-4        # optional, explicit keys override it
///   dims    = 1, 1              # d, m
///   p       = x2                # all components, separated by ';'
///   p[1]    = x2                # single component, 1-based
///   q       = M1*(x1^2-1)
///   moments = 1                 # highest moment order referenced by q
///   x0      = 1, -1
///   T       = 5
struct ProblemConfig {
  std::string preset;
  int d = 1;
  int m = 1;
  std::vector<std::string> p;
  std::vector<std::string> q;
  int moments = 1;
  std::vector<double> x0;
  double horizon = 1.0;
  DegenerateSystem system;

  /// Resolved problem with canonical expression strings; object keys sorted.
  nlohmann::json canonical() const;
  /// FNV-1a 64 of canonical().dump(), 16 hex digits.
  std::string hash() const;
};

/// Drift syntax error in a config value, with the key it came from.
class ConfigParseError : public ParseError {
 public:
  ConfigParseError(std::string key, const ParseError& e) : ParseError(e), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::filesystem::path& file);
ProblemConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace omtk
