// Plain-text experiment configuration: `[section]` headers, `key = value`
// lines and `#` comments.
#pragma once

#include "lps/core.hpp"
#include "lps/phantom.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace lps {

inline constexpr std::string_view kPhantomSection = "phantom";
inline constexpr std::string_view kBaselineSection = "solver.ls";
inline constexpr std::string_view kPrioriSection = "solver.priori";
inline constexpr std::string_view kSweepSection = "sweep";

class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  /// Overrides (or adds) a single value; `section` may be any name.
  void set(const std::string& section, const std::string& key, const std::string& value);
  std::optional<std::string> get(std::string_view section, std::string_view key) const;

  const std::map<std::string, std::map<std::string, std::string, std::less<>>, std::less<>>&
  sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string, std::less<>>, std::less<>> sections_;
};

/// Solver settings from `section`, starting from `defaults`. Unknown keys
/// are rejected.
SolverConfig solver_config_from(const ConfigFile& cfg, std::string_view section,
                                SolverConfig defaults = {});
PhantomSpec phantom_spec_from(const ConfigFile& cfg, PhantomSpec defaults = {});

/// Renders `cfg` back to text with keys sorted within sections.
std::string format_config(const ConfigFile& cfg);

namespace detail {
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
}  // namespace detail

}  // namespace lps
