#pragma once

// Static magnetics of the actuator: Amperian magnet model, lumped flux path
// and reluctance network, stator field harmonics, and the closed-form torque
// and back-emf constants.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "magact/config.hpp"
#include "magact/constants.hpp"

namespace magact {

/// Uniformly magnetized cylindrical magnet, represented by its equivalent
/// surface current sheet.
struct MagnetModel {
  double magnetization = 0;  // M0 [A/m]
  double rotor_radius = 0;   // Rr [m]

  static MagnetModel from_config(const ActuatorConfig& cfg) {
    // Ideal linear magnet: M0 = Br / mu0.
    return {cfg.magnetization(), cfg.rotor_radius};
  }
};

/// Axial surface current density of the magnet sheet at azimuth phi for rotor
/// angle beta: K(phi) = M0 cos(phi - beta).
inline double amperian_surface_current(double phi, double beta, double magnetization) {
  return magnetization * std::cos(phi - beta);
}

/// Total current enclosed by the Amperian loop: Fm = 2 Rr M0 [A].
inline double pm_mmf(const MagnetModel& magnet) {
  return 2.0 * magnet.rotor_radius * magnet.magnetization;
}

/// Lumped lengths and area of the main flux loop.
struct FluxPath {
  double magnet_length = 0;  // lm [m]
  double airgap_length = 0;  // lg [m]
  double iron_length = 0;    // li [m]
  double pole_area = 0;      // Ap [m²]
};

/// Reduce the geometry to the equivalent straight flux path: the magnet
/// cylinder becomes a prism of equal volume, the air gap is averaged over the
/// elliptical bore, and the iron return is a half-circle plus pole estimate
/// (overridable through the config).
inline FluxPath derive_flux_path(const ActuatorConfig& cfg) {
  FluxPath p;
  p.magnet_length = pi * cfg.rotor_radius * cfg.rotor_radius / cfg.pole_width;
  p.airgap_length = cfg.minor_radius + cfg.major_radius - 2.0 * cfg.rotor_radius;
  if (!(p.airgap_length > 0))
    throw std::invalid_argument("non-positive air gap: rotor larger than stator bore");
  if (cfg.iron_path_length) {
    p.iron_length = *cfg.iron_path_length;
  } else {
    const double half_yoke = 0.5 * cfg.outer_diameter - 0.25 * cfg.pole_width;
    p.iron_length = pi * half_yoke +
                    (half_yoke - 0.5 * (p.magnet_length + p.airgap_length));
  }
  p.pole_area = cfg.pole_width * cfg.stack_length;
  return p;
}

/// Series reluctances of the gap/magnet/iron loop, the total, and the
/// effective permeabilities that let each conducting segment be treated as an
/// isolated diffusion problem.
struct ReluctanceSet {
  double gap = 0;           // Rg [1/H]
  double magnet = 0;        // Rm [1/H]
  double iron = 0;          // Ri [1/H]
  double total = 0;         // Rt0 = Rg + Rm + Ri [1/H]
  double total_from_inductance = 0;  // N²/Lc0 [1/H]
  double mu_eff_iron = 0;    // [H/m]
  double mu_eff_magnet = 0;  // [H/m]
};

inline ReluctanceSet reluctance_set(const FluxPath& path, double iron_rel_permeability,
                                    double low_freq_inductance, int turns) {
  if (iron_rel_permeability < 1)
    throw std::invalid_argument("iron_rel_permeability must be >= 1");
  ReluctanceSet r;
  const double Ap = path.pole_area;
  r.gap = path.airgap_length / (mu0 * Ap);
  r.magnet = path.magnet_length / (mu0 * Ap);
  r.iron = path.iron_length / (mu0 * iron_rel_permeability * Ap);
  r.total = r.gap + r.magnet + r.iron;
  const double n2 = static_cast<double>(turns) * turns;
  r.total_from_inductance = n2 / low_freq_inductance;
  // Effective permeabilities based on the measured low-frequency inductance,
  // mu_eff = l_segment / (Rt0 Ap) with Rt0 ~ N²/Lc0.
  r.mu_eff_iron = path.iron_length * low_freq_inductance / (n2 * Ap);
  r.mu_eff_magnet = path.magnet_length * low_freq_inductance / (n2 * Ap);
  const double cap = mu0 * iron_rel_permeability;
  if (!(r.mu_eff_iron > 0) || !(r.mu_eff_magnet > 0) || r.mu_eff_iron > cap ||
      r.mu_eff_magnet > cap)
    throw std::invalid_argument("effective permeability outside (0, mu0*mu_ri]");
  return r;
}

/// One odd harmonic of the stator radial field, kn in tesla per ampere.
struct Harmonic {
  int n = 1;
  double kn = 0;  // [T/A]
};

/// Odd-harmonic expansion of the stator radial flux density at the rotor
/// surface, linear in coil current.
struct StatorFieldSpectrum {
  std::vector<Harmonic> harmonics;

  StatorFieldSpectrum() = default;
  explicit StatorFieldSpectrum(std::vector<Harmonic> h) : harmonics(std::move(h)) {
    validate();
  }

  static StatorFieldSpectrum from_fundamental(double k1) {
    return StatorFieldSpectrum{{Harmonic{1, k1}}};
  }

  /// Back-compute the fundamental from a known torque constant.
  static StatorFieldSpectrum from_torque_constant(double kt, double stack_length,
                                                  double rotor_radius,
                                                  double magnetization) {
    const double k1 =
        kt / (pi * stack_length * rotor_radius * rotor_radius * magnetization);
    return from_fundamental(k1);
  }

  double fundamental() const {
    for (const auto& h : harmonics)
      if (h.n == 1) return h.kn;
    return 0.0;
  }

  void validate() const {
    bool has_fundamental = false;
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
      if (harmonics[i].n < 1 || harmonics[i].n % 2 == 0)
        throw std::invalid_argument("stator field harmonics must be odd");
      for (std::size_t j = i + 1; j < harmonics.size(); ++j)
        if (harmonics[i].n == harmonics[j].n)
          throw std::invalid_argument("duplicate stator field harmonic");
      if (harmonics[i].n == 1) has_fundamental = true;
    }
    if (!has_fundamental) throw std::invalid_argument("fundamental harmonic missing");
  }
};

/// Radial stator field at azimuth phi for coil current ic.
inline double stator_radial_field(double phi, double coil_current,
                                  const StatorFieldSpectrum& spectrum) {
  double b = 0;
  for (const auto& h : spectrum.harmonics)
    b += h.kn * coil_current * std::sin(h.n * phi);
  return b;
}

/// kt = pi L Rr² k1 M0 [N·m/A].
inline double torque_constant(double stack_length, double rotor_radius, double k1,
                              double magnetization) {
  if (!(stack_length > 0 && rotor_radius > 0 && k1 >= 0 && magnetization > 0))
    throw std::invalid_argument("torque_constant: inputs must be positive (k1 >= 0)");
  return pi * stack_length * rotor_radius * rotor_radius * k1 * magnetization;
}

/// Coil torque kt ic sin(beta).
inline double coil_torque(double beta, double coil_current, double kt) {
  return kt * coil_current * std::sin(beta);
}

/// Reluctance torque krest sin(2 beta) produced by the elliptical bore.
inline double restoration_torque(double beta, double restoration_peak) {
  return restoration_peak * std::sin(2.0 * beta);
}

/// Total electromagnetic torque and its small-signal form about the maximum
/// torque per ampere position (theta = beta - pi/2).
inline double total_torque(double beta, double coil_current, double kt,
                           double restoration_peak) {
  return coil_torque(beta, coil_current, kt) + restoration_torque(beta, restoration_peak);
}

inline double linearized_torque(double theta, double coil_current, double kt,
                                double magnetic_spring) {
  return kt * coil_current - magnetic_spring * theta;
}

/// Torque and back-emf constants bundled with the permeance model that
/// generates the restoration torque.
struct TorqueBackemfModel {
  double kt = 0;               // torque constant [N·m/A]
  double restoration_peak = 0; // krest [N·m]
  double magnetic_spring = 0;  // ks = 2 krest [N·m/rad]
  double kb = 0;               // back-emf constant [V·s/rad], = kt
  double flux_peak = 0;        // lambda0 [Wb], = kb
  double permeance_mean = 0;   // P0 [H]
  double permeance_swing = 0;  // P1 [H]

  /// From experimentally identified constants.
  static TorqueBackemfModel from_measured(double kt, double restoration_peak) {
    TorqueBackemfModel m;
    m.kt = kt;
    m.restoration_peak = restoration_peak;
    m.magnetic_spring = 2.0 * restoration_peak;
    m.kb = kt;  // energy conservation between E ic and T omega
    m.flux_peak = kt;
    return m;
  }

  /// From field and permeance data: kt via the Lorentz integral closed form,
  /// krest = P1 Fm².
  static TorqueBackemfModel from_permeances(double permeance_mean, double permeance_swing,
                                            const MagnetModel& magnet, double k1,
                                            double stack_length) {
    TorqueBackemfModel m;
    const double fm = pm_mmf(magnet);
    m.kt = torque_constant(stack_length, magnet.rotor_radius, k1, magnet.magnetization);
    m.restoration_peak = permeance_swing * fm * fm;
    m.magnetic_spring = 2.0 * m.restoration_peak;
    m.kb = m.kt;
    m.flux_peak = m.kt;
    m.permeance_mean = permeance_mean;
    m.permeance_swing = permeance_swing;
    return m;
  }

  /// Angle-dependent permeance P(beta) = P0 - P1 cos(2 beta).
  double permeance(double beta) const {
    return permeance_mean - permeance_swing * std::cos(2.0 * beta);
  }

  /// Co-energy stored at rotor angle beta for MMF Fm.
  double coenergy(double beta, double mmf) const {
    return 0.5 * mmf * mmf * permeance(beta);
  }
};

/// Coil flux linkage lambda = Lc0 ic - lambda0 cos(beta).
inline double flux_linkage(double beta, double coil_current, double inductance,
                           double flux_peak) {
  return inductance * coil_current - flux_peak * std::cos(beta);
}

/// Magnet contribution to the linkage, lambda_m = -lambda0 cos(beta).
inline double magnet_flux_linkage(double beta, double flux_peak) {
  return -flux_peak * std::cos(beta);
}

/// Back-emf E = kb omega_r sin(beta).
inline double back_emf(double omega_r, double beta, double kb) {
  return kb * omega_r * std::sin(beta);
}

}  // namespace magact
