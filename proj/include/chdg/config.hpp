#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chdg/mesh.hpp"
#include "chdg/model.hpp"
#include "chdg/solver.hpp"

namespace chdg {

// A fully resolved experiment description: preset defaults (if any) with
// explicit key overrides applied on top.
struct RunConfig {
  std::string preset_name;                // empty for fully explicit configs
  const ProblemPreset* preset = nullptr;  // resolved from preset_name
  Domain domain{0, 1, 0, 1};
  BcKind bc = BcKind::neumann;
  int nx = 16, ny = 16;
  int q = 1;
  std::optional<double> sigma_override;
  double epsilon = 1.0;
  MobilitySpec mobility;
  PotentialSpec potential;
  double dt = 0;
  double T = 1.0;
  std::uint64_t seed = 0;
  NewtonSettings newton;
  int stride = 1;  // diagnostics rows are per step; snapshots every `stride` steps
  std::string out_dir;
  bool random_ic = true;  // otherwise the initial data is the projected exact solution
  double ic_mean = 0, ic_amplitude = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_error(int line, const std::string& what) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

inline double parse_double_or_fail(const std::string& v, int line, const std::string& key) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    config_error(line, "invalid number '" + v + "' for key '" + key + "'");
  return out;
}

inline long long parse_int_or_fail(const std::string& v, int line, const std::string& key) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    config_error(line, "invalid integer '" + v + "' for key '" + key + "'");
  return out;
}

}  // namespace detail

inline const char* to_string(BcKind bc) {
  return bc == BcKind::neumann ? "neumann" : "periodic";
}

inline const char* to_string(MobilityKind kind) {
  switch (kind) {
    case MobilityKind::constant: return "constant";
    case MobilityKind::u_one_minus_u: return "u_one_minus_u";
    case MobilityKind::one_minus_u_sq: return "one_minus_u_sq";
  }
  return "constant";
}

inline const char* to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::double_well: return "double_well";
    case PotentialKind::logarithmic: return "logarithmic";
    case PotentialKind::quadratic: return "quadratic";
  }
  return "double_well";
}

// `key = value` lines, '#' starts a comment, '=' required. Preset defaults are
// applied first, then every explicit key on top. Keys that would change the
// manufactured problem of an exact-solution preset (domain, boundary kind,
// mobility, potential) may be repeated but not altered.
inline RunConfig parse_config(const std::string& text) {
  struct Entry {
    std::string key, value;
    int line;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  {
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      if (size_t hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      std::string s = detail::trim(raw);
      if (s.empty()) continue;
      size_t eq = s.find('=');
      if (eq == std::string::npos) detail::config_error(line, "expected key=value, got '" + s + "'");
      std::string key = detail::trim(s.substr(0, eq));
      std::string value = detail::trim(s.substr(eq + 1));
      if (key.empty()) detail::config_error(line, "empty key");
      if (value.empty()) detail::config_error(line, "empty value for key '" + key + "'");
      if (!seen.insert(key).second) detail::config_error(line, "duplicate key '" + key + "'");
      entries.push_back({key, value, line});
    }
  }

  RunConfig c;
  for (const Entry& e : entries) {
    if (e.key == "preset") {
      c.preset_name = e.value;
      try {
        c.preset = &find_preset(e.value);
      } catch (const std::invalid_argument& ex) {
        detail::config_error(e.line, ex.what());
      }
    }
  }
  bool explicit_dt = false;
  if (c.preset) {
    const ProblemPreset& p = *c.preset;
    c.domain = p.domain;
    c.bc = p.bc;
    c.nx = p.nx;
    c.ny = p.ny;
    c.q = p.q;
    c.epsilon = p.epsilon;
    c.mobility = p.mobility;
    c.potential = p.potential;
    c.dt = p.dt;
    c.T = p.T;
    c.random_ic = p.random_ic;
    c.ic_mean = p.ic_mean;
    c.ic_amplitude = p.ic_amplitude;
  }

  bool saw_nx = false, saw_ny = false;
  for (const Entry& e : entries) {
    const std::string& k = e.key;
    const std::string& v = e.value;
    auto num = [&] { return detail::parse_double_or_fail(v, e.line, k); };
    auto integer = [&] { return detail::parse_int_or_fail(v, e.line, k); };
    if (k == "preset") {
      continue;
    } else if (k == "x_min") {
      c.domain.x_min = num();
    } else if (k == "x_max") {
      c.domain.x_max = num();
    } else if (k == "y_min") {
      c.domain.y_min = num();
    } else if (k == "y_max") {
      c.domain.y_max = num();
    } else if (k == "bc") {
      if (v == "neumann") c.bc = BcKind::neumann;
      else if (v == "periodic") c.bc = BcKind::periodic;
      else detail::config_error(e.line, "bc must be neumann or periodic, got '" + v + "'");
    } else if (k == "nx") {
      c.nx = static_cast<int>(integer());
      saw_nx = true;
    } else if (k == "ny") {
      c.ny = static_cast<int>(integer());
      saw_ny = true;
    } else if (k == "q") {
      c.q = static_cast<int>(integer());
    } else if (k == "sigma") {
      c.sigma_override = num();
    } else if (k == "epsilon") {
      c.epsilon = num();
    } else if (k == "mobility") {
      if (v == "constant") c.mobility.kind = MobilityKind::constant;
      else if (v == "u_one_minus_u") c.mobility.kind = MobilityKind::u_one_minus_u;
      else if (v == "one_minus_u_sq") c.mobility.kind = MobilityKind::one_minus_u_sq;
      else detail::config_error(e.line, "unknown mobility '" + v + "'");
    } else if (k == "beta") {
      c.mobility.beta = num();
    } else if (k == "potential") {
      if (v == "double_well") c.potential.kind = PotentialKind::double_well;
      else if (v == "logarithmic") c.potential.kind = PotentialKind::logarithmic;
      else if (v == "quadratic") c.potential.kind = PotentialKind::quadratic;
      else detail::config_error(e.line, "unknown potential '" + v + "'");
    } else if (k == "theta") {
      c.potential.theta = num();
    } else if (k == "theta_c") {
      c.potential.theta_c = num();
    } else if (k == "dt") {
      c.dt = num();
      explicit_dt = true;
    } else if (k == "T") {
      c.T = num();
    } else if (k == "seed") {
      long long s = integer();
      if (s < 0) detail::config_error(e.line, "seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (k == "newton_tol") {
      c.newton.tol = num();
    } else if (k == "newton_max_iter") {
      c.newton.max_iter = static_cast<int>(integer());
    } else if (k == "tau_points") {
      c.newton.tau_points = static_cast<int>(integer());
    } else if (k == "stride") {
      c.stride = static_cast<int>(integer());
    } else if (k == "out_dir") {
      c.out_dir = v;
    } else if (k == "ic_mean") {
      if (!c.random_ic)
        detail::config_error(e.line, "ic_mean only applies to random initial data");
      c.ic_mean = num();
    } else if (k == "ic_amplitude") {
      if (!c.random_ic)
        detail::config_error(e.line, "ic_amplitude only applies to random initial data");
      c.ic_amplitude = num();
    } else {
      detail::config_error(e.line, "unknown key '" + k + "'");
    }
  }
  // a lone nx keeps the mesh square unless the base config was already anisotropic
  if (saw_nx && !saw_ny && (!c.preset || c.preset->nx == c.preset->ny)) c.ny = c.nx;

  // exact-solution presets: reject overrides that change the manufactured problem
  if (c.preset && c.preset->has_exact) {
    const ProblemPreset& p = *c.preset;
    for (const Entry& e : entries) {
      bool conflict = false;
      if (e.key == "x_min") conflict = c.domain.x_min != p.domain.x_min;
      else if (e.key == "x_max") conflict = c.domain.x_max != p.domain.x_max;
      else if (e.key == "y_min") conflict = c.domain.y_min != p.domain.y_min;
      else if (e.key == "y_max") conflict = c.domain.y_max != p.domain.y_max;
      else if (e.key == "bc") conflict = !(c.bc == p.bc);
      else if (e.key == "mobility" || e.key == "beta") conflict = !(c.mobility == p.mobility);
      else if (e.key == "potential" || e.key == "theta" || e.key == "theta_c")
        conflict = !(c.potential == p.potential);
      if (conflict)
        detail::config_error(e.line, "key '" + e.key + "' conflicts with preset '" + p.name +
                                         "', which has an exact solution");
    }
  }

  if (!explicit_dt && c.preset && c.preset->dt_auto_per_level)
    c.dt = 0.25 * c.domain.width() / c.nx;  // dt = half the mesh-size label

  // final validation (config-level, not tied to one line)
  auto fail = [](const std::string& what) { throw std::runtime_error("config: " + what); };
  if (!(c.domain.width() > 0) || !(c.domain.height() > 0)) fail("domain must have positive extent");
  if (c.nx < 1 || c.ny < 1) fail("nx and ny must be at least 1");
  if (c.q < 1 || c.q > 3) fail("q must be 1, 2, or 3");
  if (c.sigma_override && !(*c.sigma_override > 0)) fail("sigma must be positive");
  if (!(c.epsilon > 0)) fail("epsilon must be positive");
  if (!(c.dt > 0)) fail("dt must be positive (set dt or use a preset that derives it)");
  if (!(c.T >= 0)) fail("T must be non-negative");
  if (c.stride < 1) fail("stride must be at least 1");
  if (!(c.newton.tol > 0)) fail("newton_tol must be positive");
  if (c.newton.max_iter < 1) fail("newton_max_iter must be at least 1");
  if (c.newton.tau_points < 2 || c.newton.tau_points > 5) fail("tau_points must be in 2..5");
  if (c.ic_amplitude < 0) fail("ic_amplitude must be non-negative");
  if (c.potential.kind == PotentialKind::logarithmic &&
      !(c.potential.theta > 0 && c.potential.theta <= c.potential.theta_c))
    fail("logarithmic potential needs 0 < theta <= theta_c");
  if (c.mobility.kind == MobilityKind::constant && !(c.mobility.beta > 0))
    fail("constant mobility needs beta > 0");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// Canonical key order with every effective value written out, so that
// parse(serialize(c)) == c and serialization is idempotent under re-parse.
inline std::string serialize_config(const RunConfig& c) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  if (!c.preset_name.empty()) os << "preset=" << c.preset_name << "\n";
  os << "x_min=" << num(c.domain.x_min) << "\n";
  os << "x_max=" << num(c.domain.x_max) << "\n";
  os << "y_min=" << num(c.domain.y_min) << "\n";
  os << "y_max=" << num(c.domain.y_max) << "\n";
  os << "bc=" << to_string(c.bc) << "\n";
  os << "nx=" << c.nx << "\n";
  os << "ny=" << c.ny << "\n";
  os << "q=" << c.q << "\n";
  if (c.sigma_override) os << "sigma=" << num(*c.sigma_override) << "\n";
  os << "epsilon=" << num(c.epsilon) << "\n";
  os << "mobility=" << to_string(c.mobility.kind) << "\n";
  os << "beta=" << num(c.mobility.beta) << "\n";
  os << "potential=" << to_string(c.potential.kind) << "\n";
  os << "theta=" << num(c.potential.theta) << "\n";
  os << "theta_c=" << num(c.potential.theta_c) << "\n";
  os << "dt=" << num(c.dt) << "\n";
  os << "T=" << num(c.T) << "\n";
  os << "seed=" << c.seed << "\n";
  os << "newton_tol=" << num(c.newton.tol) << "\n";
  os << "newton_max_iter=" << c.newton.max_iter << "\n";
  os << "tau_points=" << c.newton.tau_points << "\n";
  os << "stride=" << c.stride << "\n";
  if (!c.out_dir.empty()) os << "out_dir=" << c.out_dir << "\n";
  if (c.random_ic) {
    os << "ic_mean=" << num(c.ic_mean) << "\n";
    os << "ic_amplitude=" << num(c.ic_amplitude) << "\n";
  }
  return os.str();
}

}  // namespace chdg
