#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dllab/io/dataset.hpp"

namespace dllab::pipeline {

enum class Scale { desk, paper };

Scale parse_scale(const std::string& name);
std::string scale_name(Scale s);

/// Flat "section.key = value" configuration. The preset for a (system, scale)
/// fixes the set of valid keys; loading or setting any other key is a
/// ConfigError.
class RunConfig {
 public:
  static RunConfig preset(io::SystemId system, Scale scale);

  /// Reads a canonical or hand-written INI file and applies it over the
  /// preset named by its [run] section.
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_text(const std::string& text);

  /// Applies every key of an INI text over the current values.
  void merge_text(const std::string& text);
  void set(const std::string& key, const std::string& value);
  /// "section.key=value".
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;

  io::SystemId system() const { return io::parse_system(str("run.system")); }
  Scale scale() const { return parse_scale(str("run.scale")); }

  /// Sorted INI text of the listed sections (all sections when empty).
  std::string canonical(const std::vector<std::string>& sections = {}) const;
  std::uint64_t digest(const std::vector<std::string>& sections = {}) const;

  /// Sections that determine generated data.
  std::vector<std::string> data_sections() const;

  void write(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dllab::pipeline
