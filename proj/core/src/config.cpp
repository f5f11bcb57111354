#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/sha.h>

#include "dmabf/harness.hpp"

namespace dmabf {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected on/off, got '" + value + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Accepts dashed CLI spellings as well.
std::string normalize_key(std::string key) {
  key = lower(trim(std::move(key)));
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kFd:
      return "FD";
    case Mode::kOp1:
      return "OP1";
    case Mode::kDma:
      return "DMA";
    case Mode::kUw:
      return "UW";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& name) {
  const std::string n = lower(trim(name));
  if (n == "fd") return Mode::kFd;
  if (n == "op1") return Mode::kOp1;
  if (n == "dma") return Mode::kDma;
  if (n == "uw" || n == "op2" || n == "op2-uw") return Mode::kUw;
  throw ConfigError("unknown mode '" + name + "' (expected FD, OP1, DMA or UW)");
}

std::string to_string(Zone zone) {
  switch (zone) {
    case Zone::kNear:
      return "near";
    case Zone::kFar:
      return "far";
    case Zone::kCombined:
      return "combined";
  }
  return "unknown";
}

Zone zone_from_string(const std::string& name) {
  const std::string n = lower(trim(name));
  if (n == "near") return Zone::kNear;
  if (n == "far") return Zone::kFar;
  if (n == "combined") return Zone::kCombined;
  throw ConfigError("unknown zone '" + name + "' (expected near, far or combined)");
}

ArrayGeometry ScenarioConfig::dma_geometry() const {
  const double lambda = wavelength();
  return ArrayGeometry::from_aperture(aperture_m, d_x_over_lambda * lambda, d_y_over_lambda * lambda,
                                      gain_exponent);
}

ArrayGeometry ScenarioConfig::fd_geometry() const {
  const double lambda = wavelength();
  return ArrayGeometry::from_aperture(aperture_m, 0.5 * lambda, d_y_over_lambda * lambda, gain_exponent);
}

BeamformSettings ScenarioConfig::solver_settings() const {
  BeamformSettings s;
  s.sdp.feas_tol = tol;
  s.sdp.gap_tol = gap_tol;
  s.sdp.max_iter = max_iter;
  s.max_outer_iterations = outer_iterations;
  s.randomization_trials = randomization_trials;
  return s;
}

void ScenarioConfig::validate() const {
  if (!(frequency_hz > 0.0)) throw ConfigError("frequency_hz must be positive");
  if (!(aperture_m > 0.0)) throw ConfigError("aperture_m must be positive");
  if (!(d_x_over_lambda > 0.0) || !(d_y_over_lambda > 0.0)) {
    throw ConfigError("element spacings must be positive");
  }
  if (!(gain_exponent >= 0.0)) throw ConfigError("gain_exponent must be non-negative");
  if (modes.empty()) throw ConfigError("at least one mode is required");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(r_min >= 0.0)) throw ConfigError("r_min must be non-negative");
  if (realizations < 1) throw ConfigError("realizations must be at least 1");
  if (!(tol > 0.0) || !(gap_tol > 0.0) || max_iter < 1 || outer_iterations < 1) {
    throw ConfigError("solver tolerances must be positive and iteration limits >= 1");
  }
  if (randomization_trials < 0) throw ConfigError("randomization_trials must be >= 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (r_min == 0.0) throw ConfigError("r_min = 0 gives a zero SINR target; use a positive rate");
  ArrayGeometry dma;
  ArrayGeometry fd;
  try {
    dma = dma_geometry();
    fd = fd_geometry();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("array geometry: ") + e.what());
  }
  const bool needs_rows = std::any_of(modes.begin(), modes.end(), [](Mode m) {
    return m == Mode::kDma || m == Mode::kUw;
  });
  if (needs_rows && k > dma.n_rows) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " + std::to_string(dma.n_rows) +
                      " RF chains of the DMA");
  }
  const double d_f = fraunhofer_distance(aperture_m, wavelength());
  const double hi = zone == Zone::kNear ? d_f : 5.0 * d_f;
  if (!(reactive_zone_radius(aperture_m) < hi)) {
    throw ConfigError("sampling zone lies inside the reactive region of the aperture");
  }
}

void ScenarioConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  if (key == "frequency_hz") {
    frequency_hz = parse_double(key, value);
  } else if (key == "aperture_m") {
    aperture_m = parse_double(key, value);
  } else if (key == "d_x_over_lambda") {
    d_x_over_lambda = parse_double(key, value);
  } else if (key == "d_y_over_lambda") {
    d_y_over_lambda = parse_double(key, value);
  } else if (key == "gain_exponent" || key == "g") {
    gain_exponent = parse_double(key, value);
  } else if (key == "modes") {
    modes.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!trim(item).empty()) modes.push_back(mode_from_string(item));
    }
  } else if (key == "k") {
    k = static_cast<int>(parse_int(key, value));
  } else if (key == "r_min") {
    r_min = parse_double(key, value);
  } else if (key == "noise_dbm") {
    noise_dbm = parse_double(key, value);
  } else if (key == "zone") {
    zone = zone_from_string(value);
  } else if (key == "realizations") {
    realizations = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    const long long s = parse_int(key, value);
    if (s < 0) throw ConfigError("seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "tol") {
    tol = parse_double(key, value);
  } else if (key == "gap_tol") {
    gap_tol = parse_double(key, value);
  } else if (key == "max_iter") {
    max_iter = static_cast<int>(parse_int(key, value));
  } else if (key == "outer_iterations" || key == "t") {
    outer_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "randomization_trials") {
    randomization_trials = static_cast<int>(parse_int(key, value));
  } else if (key == "aggregate") {
    const std::string v = lower(value);
    if (v == "watts") {
      aggregate = Aggregate::kWatts;
    } else if (v == "db") {
      aggregate = Aggregate::kDb;
    } else {
      throw ConfigError("aggregate must be 'watts' or 'db'");
    }
  } else if (key == "workers") {
    workers = static_cast<int>(parse_int(key, value));
  } else if (key == "timing") {
    timing = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + raw_key + "'");
  }
}

std::map<std::string, std::string> ScenarioConfig::to_map() const {
  std::string mode_list;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i > 0) mode_list += ",";
    mode_list += to_string(modes[i]);
  }
  return {
      {"frequency_hz", fmt_double(frequency_hz)},
      {"aperture_m", fmt_double(aperture_m)},
      {"d_x_over_lambda", fmt_double(d_x_over_lambda)},
      {"d_y_over_lambda", fmt_double(d_y_over_lambda)},
      {"gain_exponent", fmt_double(gain_exponent)},
      {"modes", mode_list},
      {"k", std::to_string(k)},
      {"r_min", fmt_double(r_min)},
      {"noise_dbm", fmt_double(noise_dbm)},
      {"zone", to_string(zone)},
      {"realizations", std::to_string(realizations)},
      {"seed", std::to_string(seed)},
      {"tol", fmt_double(tol)},
      {"gap_tol", fmt_double(gap_tol)},
      {"max_iter", std::to_string(max_iter)},
      {"outer_iterations", std::to_string(outer_iterations)},
      {"randomization_trials", std::to_string(randomization_trials)},
      {"aggregate", aggregate == Aggregate::kWatts ? "watts" : "db"},
  };
}

std::string ScenarioConfig::serialize() const {
  // workers and timing do not influence results and stay out of the hash.
  std::string out;
  for (const auto& [key, value] : to_map()) out += key + " = " + value + "\n";
  return out;
}

ScenarioConfig parse_config(const std::string& text, ScenarioConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    base.set(line.substr(0, sep), line.substr(sep + 1));
  }
  return base;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::string config_content_hash(const ScenarioConfig& config) {
  const std::string body = config.serialize();
  const std::string blob = "blob " + std::to_string(body.size()) + std::string(1, '\0') + body;
  std::array<unsigned char, SHA_DIGEST_LENGTH> digest{};
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned char c : digest) {
    hex += kHex[c >> 4];
    hex += kHex[c & 0xF];
  }
  return hex;
}

}  // namespace dmabf
