#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "chac/sim.hpp"

namespace chac {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Flat key-value configuration with [section] tables.  Keys are addressed as
/// "section.key"; values are scalars, quoted strings, or [a, b, c] lists.
class ConfigMap {
 public:
  void set(const std::string& key, const std::string& raw);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;

  /// Keys present in the file that no getter ever touched.
  std::vector<std::string> unknown_keys() const;
  /// Canonical "key = value" text, sorted by key, for hashing.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

/// Build a simulation config from the [model]/[discretization]/[cutoff]/
/// [initial]/[run] tables; throws ConfigError on malformed fields.
SimConfig build_sim_config(const ConfigMap& map);

/// Construct the initial field described by the [initial] table.
SpectralFieldd build_initial_field(const ConfigMap& map, int modes, int dim,
                                   std::uint64_t seed);

}  // namespace chac
