#include "lps/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lps {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Fn>
void for_each_key(const ConfigFile& cfg, std::string_view section, Fn&& fn) {
  const auto& all = cfg.sections();
  const auto it = all.find(section);
  if (it == all.end()) return;
  for (const auto& [key, value] : it->second) {
    if (!fn(key, value))
      throw ValidationError("unknown key '" + key + "' in [" + std::string(section) + "]");
  }
}

}  // namespace

namespace detail {

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ValidationError(std::string(what) + ": '" + std::string(text) + "' is not a number");
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  text = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ValidationError(std::string(what) + ": '" + std::string(text) + "' is not an integer");
  return v;
}

}  // namespace detail

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ValidationError(where + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key = value");
    if (section.empty()) throw ValidationError(where + ": key outside of any [section]");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError(where + ": empty key");
    cfg.set(section, std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse(in, path.string());
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

std::optional<std::string> ConfigFile::get(std::string_view section, std::string_view key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

SolverConfig solver_config_from(const ConfigFile& cfg, std::string_view section,
                                SolverConfig out) {
  for_each_key(cfg, section, [&](const std::string& key, const std::string& value) {
    const std::string what = std::string(section) + "." + key;
    if (key == "lambda_L") out.lambda_L = detail::parse_double(value, what);
    else if (key == "lambda_S") out.lambda_S = detail::parse_double(value, what);
    else if (key == "lambda_p") out.lambda_p = detail::parse_double(value, what);
    else if (key == "tol") out.tol = detail::parse_double(value, what);
    else if (key == "max_iter") out.max_iter = static_cast<int>(detail::parse_integer(value, what));
    else if (key == "support_eps") out.support_eps = detail::parse_double(value, what);
    else if (key == "threshold_mode") {
      if (value == "relative") out.mode = ThresholdMode::kRelativeToProxy;
      else if (value == "absolute") out.mode = ThresholdMode::kAbsolute;
      else throw ValidationError(what + ": expected 'relative' or 'absolute'");
    } else {
      return false;
    }
    return true;
  });
  out.validate();
  return out;
}

PhantomSpec phantom_spec_from(const ConfigFile& cfg, PhantomSpec out) {
  auto count = [](const std::string& value, const std::string& what) {
    const auto v = detail::parse_integer(value, what);
    if (v < 0) throw ValidationError(what + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  for_each_key(cfg, kPhantomSection, [&](const std::string& key, const std::string& value) {
    const std::string what = "phantom." + key;
    if (key == "nx") out.dims.nx = count(value, what);
    else if (key == "ny") out.dims.ny = count(value, what);
    else if (key == "nz") out.dims.nz = count(value, what);
    else if (key == "frames") out.n_frames = count(value, what);
    else if (key == "rank") out.background_rank = count(value, what);
    else if (key == "blobs") out.n_blobs = count(value, what);
    else if (key == "blob_amplitude") out.blob_amplitude = detail::parse_double(value, what);
    else if (key == "blob_width") out.blob_width = detail::parse_double(value, what);
    else if (key == "motion_step") out.motion_step = detail::parse_double(value, what);
    else if (key == "drift") out.drift = detail::parse_double(value, what);
    else if (key == "noise_sigma") out.noise_sigma = detail::parse_double(value, what);
    else if (key == "seed") out.seed = count(value, what);
    else return false;
    return true;
  });
  out.validate();
  return out;
}

std::string format_config(const ConfigFile& cfg) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [section, entries] : cfg.sections()) {
    if (!first) os << '\n';
    first = false;
    os << '[' << section << "]\n";
    for (const auto& [key, value] : entries) os << key << " = " << value << '\n';
  }
  return os.str();
}

}  // namespace lps
