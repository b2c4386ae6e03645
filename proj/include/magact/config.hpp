#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magact/constants.hpp"

namespace magact {

/// Thrown on malformed or inconsistent configuration input. `line` is the
/// 1-based line number of the offending entry, or 0 when not line-specific.
struct config_error : std::runtime_error {
  int line = 0;
  config_error(const std::string& msg, int line_ = 0)
      : std::runtime_error(line_ > 0 ? msg + " (line " + std::to_string(line_) + ")" : msg),
        line(line_) {}
};

/// Geometry, material, and electrical constants of the actuator.
/// All lengths in meters, conductivities in S/m, inductance in H.
struct ActuatorConfig {
  double outer_diameter = 0;         // stator outer diameter Do
  double lamination_thickness = 0;   // single lamination thickness d
  int lamination_count = 0;          // number of laminations m
  double stack_length = 0;           // axial stack length L
  double pole_width = 0;             // pole width wp
  double rotor_radius = 0;           // rotor (magnet) radius Rr
  double minor_radius = 0;           // elliptical bore minor radius R1
  double major_radius = 0;           // elliptical bore major radius R2
  double pm_length = 0;              // magnet axial length
  int turns = 0;                     // total coil turns N
  double pm_remanence = 0;           // magnet remanent flux density [T]
  double pm_conductivity = 0;        // magnet conductivity [S/m]
  double iron_conductivity = 0;      // lamination conductivity [S/m]
  double iron_rel_permeability = 0;  // relative permeability of iron
  double coil_resistance = 0;        // Rc [ohm]
  double sense_resistance = 0;       // Rs [ohm]
  double low_freq_inductance = 0;    // Lc0 [H]

  // The iron path length of the reluctance network is itself an
  // approximation; allow overriding the built-in half-circle-plus-pole
  // estimate without touching the geometry.
  std::optional<double> iron_path_length;
  // Fundamental of the stator radial field per ampere [T/A]. When absent it
  // is back-computed from the measured torque constant.
  std::optional<double> stator_fundamental;

  double magnetization() const { return pm_remanence / mu0; }
  double series_resistance() const { return coil_resistance + sense_resistance; }
  double pole_area() const { return pole_width * stack_length; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0)) throw config_error(std::string("'") + name + "' must be > 0");
    };
    positive(outer_diameter, "outer_diameter_m");
    positive(lamination_thickness, "lamination_thickness_m");
    positive(stack_length, "stack_length_m");
    positive(pole_width, "pole_width_m");
    positive(rotor_radius, "rotor_radius_m");
    positive(minor_radius, "minor_radius_m");
    positive(major_radius, "major_radius_m");
    positive(pm_length, "pm_length_m");
    positive(pm_remanence, "pm_remanent_T");
    positive(low_freq_inductance, "low_freq_inductance_H");
    if (turns < 1) throw config_error("'turns' must be >= 1");
    if (lamination_count < 1) throw config_error("'lamination_count' must be >= 1");
    if (pm_conductivity < 0 || iron_conductivity < 0)
      throw config_error("conductivities must be >= 0");
    if (iron_rel_permeability < 1)
      throw config_error("'iron_rel_permeability' must be >= 1");
    if (coil_resistance < 0 || sense_resistance < 0)
      throw config_error("resistances must be >= 0");
    if (!(major_radius >= minor_radius && minor_radius > rotor_radius))
      throw config_error("radii must satisfy major >= minor > rotor (no air gap left)");
    // Stack consistency: m laminations of thickness d make up the stack.
    const double md = lamination_count * lamination_thickness;
    if (std::abs(md - stack_length) > 0.05 * stack_length)
      throw config_error("lamination_count * lamination_thickness deviates from "
                         "stack_length_m by more than 5%");
    if (iron_path_length && !(*iron_path_length > 0))
      throw config_error("'iron_path_length_m' must be > 0");
    if (stator_fundamental && !(*stator_fundamental > 0))
      throw config_error("'stator_fundamental_T_per_A' must be > 0");
  }
};

/// Electromechanical constants identified from experiments (Table-style data).
/// Stored in SI; milli-prefixed config keys are converted on load.
struct MeasuredConstants {
  double torque_constant = 0;   // kt [N·m/A]
  double magnetic_spring = 0;   // ks = 2·krest [N·m/rad]
  double total_stiffness = 0;   // Ks = ks + bristle stiffness [N·m/rad]
  double total_damping = 0;     // Kd [N·m·s/rad]
  double inertia = 0;           // J [kg·m²]

  double restoration_peak() const { return 0.5 * magnetic_spring; }

  void validate() const {
    if (!(torque_constant > 0)) throw config_error("'torque_constant_mNm_per_A' must be > 0");
    if (!(magnetic_spring > 0)) throw config_error("'magnetic_spring_mNm_per_rad' must be > 0");
    if (!(total_stiffness > 0)) throw config_error("'total_stiffness_mNm_per_rad' must be > 0");
    if (total_damping < 0) throw config_error("'total_damping_Nms_per_rad' must be >= 0");
    if (!(inertia > 0)) throw config_error("'inertia_kgm2' must be > 0");
  }
};

/// Identified eddy-current loss products for laminations and magnet [s/m²].
struct EddyProducts {
  double musigma_iron = 0;
  double musigma_magnet = 0;

  void validate() const {
    if (musigma_iron < 0 || musigma_magnet < 0)
      throw config_error("musigma products must be >= 0");
  }
};

/// Pre-sliding friction (LuGre) parameters.
struct LuGreParams {
  double sigma_s = 0;  // bristle stiffness [N·m/rad]
  double sigma_d = 0;  // bristle damping [N·m·s/rad]
  double coulomb = 0;  // Fc [N·m]
  double breakaway = 0;  // Fs [N·m]
  double stribeck_velocity = 0;  // vs [rad/s]

  void validate() const {
    if (!(coulomb > 0)) throw config_error("'lugre_coulomb_Nm' must be > 0");
    if (!(breakaway >= coulomb)) throw config_error("'lugre_static_Nm' must be >= coulomb level");
    if (!(stribeck_velocity > 0)) throw config_error("'lugre_stribeck_rad_per_s' must be > 0");
    if (sigma_s < 0 || sigma_d < 0) throw config_error("lugre sigma values must be >= 0");
  }
};

/// A parsed configuration file. The actuator block is mandatory; the other
/// groups appear only when their keys are present.
struct Config {
  ActuatorConfig actuator;
  std::optional<MeasuredConstants> measured;
  std::optional<EddyProducts> eddy;
  std::optional<LuGreParams> lugre;

  const MeasuredConstants& require_measured() const {
    if (!measured) throw config_error("missing key 'torque_constant_mNm_per_A' (measured constants required)");
    return *measured;
  }
  const EddyProducts& require_eddy() const {
    if (!eddy) throw config_error("missing key 'musigma_iron_s_per_m2' (eddy products required)");
    return *eddy;
  }
  const LuGreParams& require_lugre() const {
    if (!lugre) throw config_error("missing key 'lugre_static_Nm' (LuGre parameters required)");
    return *lugre;
  }
};

namespace detail {

struct KeyEntry {
  const char* key;
  double scale;       // applied multiplicatively on load
  bool required;
  bool integer;
  double* (*dptr)(Config&);
  int* (*iptr)(Config&);
};

// clang-format off
inline const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = {
    {"outer_diameter_m",            1.0,  true,  false, [](Config& c) { return &c.actuator.outer_diameter; }, nullptr},
    {"lamination_thickness_m",      1.0,  true,  false, [](Config& c) { return &c.actuator.lamination_thickness; }, nullptr},
    {"lamination_count",            1.0,  true,  true,  nullptr, [](Config& c) { return &c.actuator.lamination_count; }},
    {"stack_length_m",              1.0,  true,  false, [](Config& c) { return &c.actuator.stack_length; }, nullptr},
    {"pole_width_m",                1.0,  true,  false, [](Config& c) { return &c.actuator.pole_width; }, nullptr},
    {"rotor_radius_m",              1.0,  true,  false, [](Config& c) { return &c.actuator.rotor_radius; }, nullptr},
    {"minor_radius_m",              1.0,  true,  false, [](Config& c) { return &c.actuator.minor_radius; }, nullptr},
    {"major_radius_m",              1.0,  true,  false, [](Config& c) { return &c.actuator.major_radius; }, nullptr},
    {"pm_length_m",                 1.0,  true,  false, [](Config& c) { return &c.actuator.pm_length; }, nullptr},
    {"turns",                       1.0,  true,  true,  nullptr, [](Config& c) { return &c.actuator.turns; }},
    {"pm_remanent_T",               1.0,  true,  false, [](Config& c) { return &c.actuator.pm_remanence; }, nullptr},
    {"pm_conductivity_S_per_m",     1.0,  true,  false, [](Config& c) { return &c.actuator.pm_conductivity; }, nullptr},
    {"iron_conductivity_S_per_m",   1.0,  true,  false, [](Config& c) { return &c.actuator.iron_conductivity; }, nullptr},
    {"iron_rel_permeability",       1.0,  true,  false, [](Config& c) { return &c.actuator.iron_rel_permeability; }, nullptr},
    {"coil_resistance_ohm",         1.0,  true,  false, [](Config& c) { return &c.actuator.coil_resistance; }, nullptr},
    {"sense_resistance_ohm",        1.0,  true,  false, [](Config& c) { return &c.actuator.sense_resistance; }, nullptr},
    {"low_freq_inductance_H",       1.0,  true,  false, [](Config& c) { return &c.actuator.low_freq_inductance; }, nullptr},
  };
  return table;
}
// clang-format on

inline double parse_number(const std::string& text, int line) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw config_error("cannot parse numeric value '" + text + "'", line);
  if (!std::isfinite(v)) throw config_error("non-finite value '" + text + "'", line);
  return v;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parse a flat `key = value` configuration. `#` starts a comment; blank
/// lines are ignored. Unknown or duplicate keys are rejected with their line
/// number; required actuator keys must all be present.
inline Config parse_config(std::istream& in) {
  Config cfg;
  std::map<std::string, int> seen;  // key -> line
  // Optional-group staging: key -> (value, line).
  std::map<std::string, double> opt;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value'", lineno);
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) throw config_error("empty key", lineno);
    if (value.empty()) throw config_error("empty value for key '" + key + "'", lineno);
    if (seen.count(key)) throw config_error("duplicate key '" + key + "'", lineno);
    seen[key] = lineno;

    bool matched = false;
    for (const auto& entry : detail::key_table()) {
      if (key != entry.key) continue;
      const double v = detail::parse_number(value, lineno) * entry.scale;
      if (entry.integer) {
        if (v != std::floor(v)) throw config_error("'" + key + "' must be an integer", lineno);
        *entry.iptr(cfg) = static_cast<int>(v);
      } else {
        *entry.dptr(cfg) = v;
      }
      matched = true;
      break;
    }
    if (matched) continue;

    static const std::vector<std::string> optional_keys = {
        "iron_path_length_m", "stator_fundamental_T_per_A",
        "torque_constant_mNm_per_A", "magnetic_spring_mNm_per_rad",
        "total_stiffness_mNm_per_rad", "total_damping_Nms_per_rad", "inertia_kgm2",
        "musigma_iron_s_per_m2", "musigma_magnet_s_per_m2",
        "lugre_bristle_stiffness_Nm_per_rad", "lugre_bristle_damping_Nms_per_rad",
        "lugre_coulomb_Nm", "lugre_static_Nm", "lugre_stribeck_rad_per_s"};
    for (const auto& ok : optional_keys) {
      if (key == ok) {
        opt[key] = detail::parse_number(value, lineno);
        matched = true;
        break;
      }
    }
    if (!matched) throw config_error("unknown key '" + key + "'", lineno);
  }

  for (const auto& entry : detail::key_table())
    if (entry.required && !seen.count(entry.key))
      throw config_error(std::string("missing key '") + entry.key + "'");

  if (opt.count("iron_path_length_m"))
    cfg.actuator.iron_path_length = opt["iron_path_length_m"];
  if (opt.count("stator_fundamental_T_per_A"))
    cfg.actuator.stator_fundamental = opt["stator_fundamental_T_per_A"];

  // The measured group is all-or-nothing.
  static const char* measured_keys[] = {
      "torque_constant_mNm_per_A", "magnetic_spring_mNm_per_rad",
      "total_stiffness_mNm_per_rad", "total_damping_Nms_per_rad", "inertia_kgm2"};
  int n_measured = 0;
  for (const char* k : measured_keys) n_measured += opt.count(k) ? 1 : 0;
  if (n_measured == 5) {
    MeasuredConstants mc;
    mc.torque_constant = opt["torque_constant_mNm_per_A"] * 1e-3;
    mc.magnetic_spring = opt["magnetic_spring_mNm_per_rad"] * 1e-3;
    mc.total_stiffness = opt["total_stiffness_mNm_per_rad"] * 1e-3;
    mc.total_damping = opt["total_damping_Nms_per_rad"];
    mc.inertia = opt["inertia_kgm2"];
    cfg.measured = mc;
  } else if (n_measured > 0) {
    for (const char* k : measured_keys)
      if (!opt.count(k)) throw config_error(std::string("missing key '") + k + "'");
  }

  if (opt.count("musigma_iron_s_per_m2") || opt.count("musigma_magnet_s_per_m2")) {
    EddyProducts ep;
    ep.musigma_iron = opt.count("musigma_iron_s_per_m2") ? opt["musigma_iron_s_per_m2"] : 0.0;
    ep.musigma_magnet = opt.count("musigma_magnet_s_per_m2") ? opt["musigma_magnet_s_per_m2"] : 0.0;
    cfg.eddy = ep;
  }

  static const char* lugre_keys[] = {
      "lugre_bristle_stiffness_Nm_per_rad", "lugre_bristle_damping_Nms_per_rad",
      "lugre_coulomb_Nm", "lugre_static_Nm", "lugre_stribeck_rad_per_s"};
  int n_lugre = 0;
  for (const char* k : lugre_keys) n_lugre += opt.count(k) ? 1 : 0;
  if (n_lugre == 5) {
    LuGreParams lp;
    lp.sigma_s = opt["lugre_bristle_stiffness_Nm_per_rad"];
    lp.sigma_d = opt["lugre_bristle_damping_Nms_per_rad"];
    lp.coulomb = opt["lugre_coulomb_Nm"];
    lp.breakaway = opt["lugre_static_Nm"];
    lp.stribeck_velocity = opt["lugre_stribeck_rad_per_s"];
    cfg.lugre = lp;
  } else if (n_lugre > 0) {
    for (const char* k : lugre_keys)
      if (!opt.count(k)) throw config_error(std::string("missing key '") + k + "'");
  }

  cfg.actuator.validate();
  if (cfg.measured) cfg.measured->validate();
  if (cfg.eddy) cfg.eddy->validate();
  if (cfg.lugre) cfg.lugre->validate();
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

namespace detail {
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Emit a configuration in the exact format parse_config accepts; values are
/// written at full precision so that a round trip is bit-exact.
inline std::string write_config(const Config& cfg) {
  std::ostringstream out;
  const ActuatorConfig& a = cfg.actuator;
  using detail::fmt_full;
  out << "outer_diameter_m = " << fmt_full(a.outer_diameter) << '\n'
      << "lamination_thickness_m = " << fmt_full(a.lamination_thickness) << '\n'
      << "lamination_count = " << a.lamination_count << '\n'
      << "stack_length_m = " << fmt_full(a.stack_length) << '\n'
      << "pole_width_m = " << fmt_full(a.pole_width) << '\n'
      << "rotor_radius_m = " << fmt_full(a.rotor_radius) << '\n'
      << "minor_radius_m = " << fmt_full(a.minor_radius) << '\n'
      << "major_radius_m = " << fmt_full(a.major_radius) << '\n'
      << "pm_length_m = " << fmt_full(a.pm_length) << '\n'
      << "turns = " << a.turns << '\n'
      << "pm_remanent_T = " << fmt_full(a.pm_remanence) << '\n'
      << "pm_conductivity_S_per_m = " << fmt_full(a.pm_conductivity) << '\n'
      << "iron_conductivity_S_per_m = " << fmt_full(a.iron_conductivity) << '\n'
      << "iron_rel_permeability = " << fmt_full(a.iron_rel_permeability) << '\n'
      << "coil_resistance_ohm = " << fmt_full(a.coil_resistance) << '\n'
      << "sense_resistance_ohm = " << fmt_full(a.sense_resistance) << '\n'
      << "low_freq_inductance_H = " << fmt_full(a.low_freq_inductance) << '\n';
  if (a.iron_path_length)
    out << "iron_path_length_m = " << fmt_full(*a.iron_path_length) << '\n';
  if (a.stator_fundamental)
    out << "stator_fundamental_T_per_A = " << fmt_full(*a.stator_fundamental) << '\n';
  if (cfg.measured) {
    const auto& m = *cfg.measured;
    out << "torque_constant_mNm_per_A = " << fmt_full(m.torque_constant * 1e3) << '\n'
        << "magnetic_spring_mNm_per_rad = " << fmt_full(m.magnetic_spring * 1e3) << '\n'
        << "total_stiffness_mNm_per_rad = " << fmt_full(m.total_stiffness * 1e3) << '\n'
        << "total_damping_Nms_per_rad = " << fmt_full(m.total_damping) << '\n'
        << "inertia_kgm2 = " << fmt_full(m.inertia) << '\n';
  }
  if (cfg.eddy) {
    out << "musigma_iron_s_per_m2 = " << fmt_full(cfg.eddy->musigma_iron) << '\n'
        << "musigma_magnet_s_per_m2 = " << fmt_full(cfg.eddy->musigma_magnet) << '\n';
  }
  if (cfg.lugre) {
    const auto& l = *cfg.lugre;
    out << "lugre_bristle_stiffness_Nm_per_rad = " << fmt_full(l.sigma_s) << '\n'
        << "lugre_bristle_damping_Nms_per_rad = " << fmt_full(l.sigma_d) << '\n'
        << "lugre_coulomb_Nm = " << fmt_full(l.coulomb) << '\n'
        << "lugre_static_Nm = " << fmt_full(l.breakaway) << '\n'
        << "lugre_stribeck_rad_per_s = " << fmt_full(l.stribeck_velocity) << '\n';
  }
  return out.str();
}

}  // namespace magact
