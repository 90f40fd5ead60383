#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nomapair/rng.hpp"

namespace nomapair {

using CVector = Eigen::VectorXcd;

enum class Zone { near, far };

inline const char* to_string(Zone z) { return z == Zone::near ? "near" : "far"; }

/// Cell and link-budget parameters. Defaults are the small-cell setup with
/// 3 near users, 5 far users, 6 antennas and a 30 dBm budget.
struct SystemConfig {
  double bandwidth_hz = 20e6;
  double noise_density_dbm_hz = -174.0;
  double pathloss_offset_db = 140.0;
  double pathloss_slope = 37.6;  // dB per decade of distance in km
  double shadowing_std_db = 8.0;
  double cell_radius_m = 100.0;
  double inner_radius_m = 50.0;
  double min_bs_distance_m = 5.0;
  int num_antennas = 6;
  int num_near = 3;
  int num_far = 5;
  double pmax_dbm = 30.0;

  int num_users() const { return num_near + num_far; }

  /// Throws std::invalid_argument naming the first broken invariant.
  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("config: bandwidth_hz must be > 0");
    if (!(min_bs_distance_m > 0.0 && min_bs_distance_m < inner_radius_m &&
          inner_radius_m < cell_radius_m)) {
      throw std::invalid_argument(
          "config: need 0 < min_bs_distance_m < inner_radius_m < cell_radius_m");
    }
    if (num_antennas < 1) throw std::invalid_argument("config: num_antennas must be >= 1");
    if (num_near < 1) throw std::invalid_argument("config: num_near must be >= 1");
    if (num_far < 1) throw std::invalid_argument("config: num_far must be >= 1");
    if (!std::isfinite(pmax_dbm)) throw std::invalid_argument("config: pmax_dbm must be finite");
  }

  bool operator==(const SystemConfig&) const = default;
};

struct UserPlacement {
  Zone zone = Zone::near;
  double x_m = 0.0;
  double y_m = 0.0;
  double distance_m = 0.0;

  bool operator==(const UserPlacement&) const = default;
};

/// One network realization. Users are stored flat: near users 0..M-1 then
/// far users M..M+N-1, i.e. (1,1)..(1,M),(2,1)..(2,N).
struct Scenario {
  SystemConfig config;
  std::vector<UserPlacement> placements;
  std::vector<CVector> channels;
  std::vector<double> noise_powers;  // W, or exactly 1 after normalization
  double pmax_w = 1.0;
  bool normalized = false;
  std::uint64_t seed = 0;

  int M() const { return config.num_near; }
  int N() const { return config.num_far; }
  int L() const { return config.num_antennas; }
  int num_users() const { return config.num_users(); }

  int near_user(int m) const { return m; }
  int far_user(int n) const { return config.num_near + n; }

  const CVector& h_near(int m) const { return channels.at(static_cast<std::size_t>(near_user(m))); }
  const CVector& h_far(int n) const { return channels.at(static_cast<std::size_t>(far_user(n))); }
  double noise_near(int m) const { return noise_powers.at(static_cast<std::size_t>(near_user(m))); }
  double noise_far(int n) const { return noise_powers.at(static_cast<std::size_t>(far_user(n))); }

  void validate() const {
    config.validate();
    const auto users = static_cast<std::size_t>(num_users());
    if (channels.size() != users) throw std::invalid_argument("scenario: channel count != M + N");
    if (noise_powers.size() != users) throw std::invalid_argument("scenario: noise count != M + N");
    if (!placements.empty() && placements.size() != users) {
      throw std::invalid_argument("scenario: placement count != M + N");
    }
    for (std::size_t u = 0; u < users; ++u) {
      if (channels[u].size() != L()) {
        throw std::invalid_argument("scenario: channel vector " + std::to_string(u) +
                                    " has length " + std::to_string(channels[u].size()) +
                                    ", expected L = " + std::to_string(L()));
      }
      if (!(noise_powers[u] > 0.0)) throw std::invalid_argument("scenario: noise power must be > 0");
      if (normalized && noise_powers[u] != 1.0) {
        throw std::invalid_argument("scenario: normalized scenario must have unit noise");
      }
    }
    if (!(pmax_w > 0.0)) throw std::invalid_argument("scenario: pmax_w must be > 0");
  }

  bool operator==(const Scenario& o) const {
    if (!(config == o.config && placements == o.placements && noise_powers == o.noise_powers &&
          pmax_w == o.pmax_w && normalized == o.normalized && seed == o.seed &&
          channels.size() == o.channels.size())) {
      return false;
    }
    for (std::size_t u = 0; u < channels.size(); ++u) {
      if (channels[u].size() != o.channels[u].size() || channels[u] != o.channels[u]) return false;
    }
    return true;
  }
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Distance-dependent path loss with the distance taken in kilometres.
inline double path_loss_db(const SystemConfig& c, double distance_m) {
  if (!(distance_m > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  return c.pathloss_offset_db + c.pathloss_slope * std::log10(distance_m / 1000.0);
}

inline double path_loss_db(double distance_m) { return path_loss_db(SystemConfig{}, distance_m); }

inline double noise_power_dbm(const SystemConfig& c) {
  if (!(c.bandwidth_hz > 0.0)) throw std::domain_error("noise_power_dbm: bandwidth must be positive");
  return c.noise_density_dbm_hz + 10.0 * std::log10(c.bandwidth_hz);
}

namespace detail {

// Uniform-in-area radius on [r_lo, r_hi] from a uniform variate u in [0,1].
inline double area_uniform_radius(double r_lo, double r_hi, double u) {
  return std::sqrt(r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo));
}

}  // namespace detail

/// Draws one realization. Per user, in order (1,1)..(2,N): angle, radius,
/// shadowing, then L fading coefficients.
inline Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Scenario s;
  s.config = config;
  s.seed = seed;
  s.pmax_w = dbm_to_watt(config.pmax_dbm);
  const double noise_w = dbm_to_watt(noise_power_dbm(config));
  const int users = config.num_users();
  s.placements.reserve(static_cast<std::size_t>(users));
  s.channels.reserve(static_cast<std::size_t>(users));
  s.noise_powers.assign(static_cast<std::size_t>(users), noise_w);

  for (int u = 0; u < users; ++u) {
    UserPlacement p;
    p.zone = u < config.num_near ? Zone::near : Zone::far;
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double r = p.zone == Zone::near
                         ? detail::area_uniform_radius(config.min_bs_distance_m,
                                                       config.inner_radius_m, rng.uniform())
                         : detail::area_uniform_radius(config.inner_radius_m, config.cell_radius_m,
                                                       rng.uniform_open_low());
    p.x_m = r * std::cos(angle);
    p.y_m = r * std::sin(angle);
    p.distance_m = std::hypot(p.x_m, p.y_m);
    const double shadow_db = rng.normal(0.0, config.shadowing_std_db);
    const double amplitude = std::pow(10.0, -(path_loss_db(config, p.distance_m) + shadow_db) / 20.0);
    CVector h(config.num_antennas);
    for (int l = 0; l < config.num_antennas; ++l) h(l) = amplitude * rng.complex_normal();
    s.placements.push_back(p);
    s.channels.push_back(std::move(h));
  }
  return s;
}

/// Rescales every channel by its user's noise standard deviation so the
/// solver works with unit noise. SINRs are unchanged.
inline Scenario normalize(const Scenario& s) {
  if (s.normalized) throw std::domain_error("normalize: scenario is already normalized");
  Scenario out = s;
  for (std::size_t u = 0; u < out.channels.size(); ++u) {
    const double sigma2 = out.noise_powers[u];
    if (!(sigma2 > 0.0)) throw std::domain_error("normalize: noise power must be positive");
    out.channels[u] /= std::sqrt(sigma2);
    out.noise_powers[u] = 1.0;
  }
  out.normalized = true;
  return out;
}

// ---------------------------------------------------------------------------
// Scenario file (JSON, version 1)

inline constexpr int kScenarioFileVersion = 1;

/// Malformed or inconsistent scenario file.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : "field '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(ctx.empty() ? key : ctx + "." + key, "missing required field");
  }
  return j.at(key);
}

template <typename T>
T read_field(const nlohmann::json& j, const char* key, const std::string& ctx) {
  const auto& v = require(j, key, ctx);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx.empty() ? key : ctx + "." + key, std::string("wrong type: ") + e.what());
  }
}

}  // namespace detail

inline nlohmann::json to_json(const SystemConfig& c) {
  return {{"bandwidth_hz", c.bandwidth_hz},
          {"noise_density_dbm_hz", c.noise_density_dbm_hz},
          {"pathloss_offset_db", c.pathloss_offset_db},
          {"pathloss_slope", c.pathloss_slope},
          {"shadowing_std_db", c.shadowing_std_db},
          {"cell_radius_m", c.cell_radius_m},
          {"inner_radius_m", c.inner_radius_m},
          {"min_bs_distance_m", c.min_bs_distance_m},
          {"num_antennas", c.num_antennas},
          {"num_near", c.num_near},
          {"num_far", c.num_far},
          {"pmax_dbm", c.pmax_dbm}};
}

inline SystemConfig config_from_json(const nlohmann::json& j) {
  using detail::read_field;
  const std::string ctx = "config";
  SystemConfig c;
  c.bandwidth_hz = read_field<double>(j, "bandwidth_hz", ctx);
  c.noise_density_dbm_hz = read_field<double>(j, "noise_density_dbm_hz", ctx);
  c.pathloss_offset_db = read_field<double>(j, "pathloss_offset_db", ctx);
  c.pathloss_slope = read_field<double>(j, "pathloss_slope", ctx);
  c.shadowing_std_db = read_field<double>(j, "shadowing_std_db", ctx);
  c.cell_radius_m = read_field<double>(j, "cell_radius_m", ctx);
  c.inner_radius_m = read_field<double>(j, "inner_radius_m", ctx);
  c.min_bs_distance_m = read_field<double>(j, "min_bs_distance_m", ctx);
  c.num_antennas = read_field<int>(j, "num_antennas", ctx);
  c.num_near = read_field<int>(j, "num_near", ctx);
  c.num_far = read_field<int>(j, "num_far", ctx);
  c.pmax_dbm = read_field<double>(j, "pmax_dbm", ctx);
  return c;
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json placements = nlohmann::json::array();
  for (const auto& p : s.placements) {
    placements.push_back({{"zone", to_string(p.zone)}, {"x_m", p.x_m}, {"y_m", p.y_m}});
  }
  nlohmann::json channels = nlohmann::json::array();
  for (int u = 0; u < s.num_users(); ++u) {
    const bool near = u < s.M();
    const CVector& h = s.channels[static_cast<std::size_t>(u)];
    std::vector<double> re(static_cast<std::size_t>(h.size())), im(re.size());
    for (Eigen::Index l = 0; l < h.size(); ++l) {
      re[static_cast<std::size_t>(l)] = h(l).real();
      im[static_cast<std::size_t>(l)] = h(l).imag();
    }
    channels.push_back({{"i", near ? 1 : 2}, {"j", near ? u + 1 : u - s.M() + 1}, {"re", re}, {"im", im}});
  }
  return {{"version", kScenarioFileVersion},
          {"config", to_json(s.config)},
          {"seed", s.seed},
          {"normalized", s.normalized},
          {"pmax_w", s.pmax_w},
          {"noise_powers_w", s.noise_powers},
          {"placements", placements},
          {"channels", channels}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::read_field;
  using detail::require;
  const int version = read_field<int>(j, "version", "");
  if (version != kScenarioFileVersion) {
    throw ParseError("version", "unsupported scenario file version " + std::to_string(version) +
                                    " (expected " + std::to_string(kScenarioFileVersion) + ")");
  }
  Scenario s;
  s.config = config_from_json(require(j, "config", ""));
  try {
    s.config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError("config", e.what());
  }
  s.seed = read_field<std::uint64_t>(j, "seed", "");
  s.normalized = read_field<bool>(j, "normalized", "");
  const int users = s.config.num_users();
  const int L = s.config.num_antennas;

  const auto& placements = require(j, "placements", "");
  if (!placements.is_array()) throw ParseError("placements", "expected an array");
  for (std::size_t k = 0; k < placements.size(); ++k) {
    const std::string ctx = "placements[" + std::to_string(k) + "]";
    const auto& pj = placements[k];
    UserPlacement p;
    const auto zone = read_field<std::string>(pj, "zone", ctx);
    if (zone == "near") {
      p.zone = Zone::near;
    } else if (zone == "far") {
      p.zone = Zone::far;
    } else {
      throw ParseError(ctx + ".zone", "expected 'near' or 'far', got '" + zone + "'");
    }
    p.x_m = read_field<double>(pj, "x_m", ctx);
    p.y_m = read_field<double>(pj, "y_m", ctx);
    p.distance_m = std::hypot(p.x_m, p.y_m);
    s.placements.push_back(p);
  }
  if (!s.placements.empty() && static_cast<int>(s.placements.size()) != users) {
    throw ParseError("placements", "expected " + std::to_string(users) + " entries");
  }

  const auto& channels = require(j, "channels", "");
  if (!channels.is_array()) throw ParseError("channels", "expected an array");
  if (static_cast<int>(channels.size()) != users) {
    throw ParseError("channels", "expected " + std::to_string(users) + " entries, found " +
                                     std::to_string(channels.size()));
  }
  s.channels.assign(static_cast<std::size_t>(users), CVector());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const std::string ctx = "channels[" + std::to_string(k) + "]";
    const auto& cj = channels[k];
    const int i = read_field<int>(cj, "i", ctx);
    const int jj = read_field<int>(cj, "j", ctx);
    int flat = -1;
    if (i == 1 && jj >= 1 && jj <= s.config.num_near) flat = jj - 1;
    if (i == 2 && jj >= 1 && jj <= s.config.num_far) flat = s.config.num_near + jj - 1;
    if (flat < 0) throw ParseError(ctx, "user index (" + std::to_string(i) + "," + std::to_string(jj) + ") out of range");
    if (static_cast<std::size_t>(flat) != k) throw ParseError(ctx, "users must be ordered (1,1)..(1,M),(2,1)..(2,N)");
    const auto re = read_field<std::vector<double>>(cj, "re", ctx);
    const auto im = read_field<std::vector<double>>(cj, "im", ctx);
    if (static_cast<int>(re.size()) != L || static_cast<int>(im.size()) != L) {
      throw ParseError(ctx, "channel vector length must equal num_antennas = " + std::to_string(L));
    }
    CVector h(L);
    for (int l = 0; l < L; ++l) h(l) = {re[static_cast<std::size_t>(l)], im[static_cast<std::size_t>(l)]};
    s.channels[static_cast<std::size_t>(flat)] = std::move(h);
  }

  if (j.contains("noise_powers_w")) {
    s.noise_powers = read_field<std::vector<double>>(j, "noise_powers_w", "");
  } else {
    s.noise_powers.assign(static_cast<std::size_t>(users),
                          s.normalized ? 1.0 : dbm_to_watt(noise_power_dbm(s.config)));
  }
  s.pmax_w = j.contains("pmax_w") ? read_field<double>(j, "pmax_w", "") : dbm_to_watt(s.config.pmax_dbm);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError("", e.what());
  }
  return s;
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scenario: cannot open " + path);
  out << to_json(s).dump(2) << '\n';
  if (!out) throw std::runtime_error("save_scenario: write failed for " + path);
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offset -> line number for the message.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("", "malformed scenario file near line " + std::to_string(line) + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scenario: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace nomapair
