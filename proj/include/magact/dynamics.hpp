#pragma once

// Electromechanical dynamics: nonlinear state-space model, equilibria and
// analytic linearization about the maximum torque per ampere position,
// transfer functions, LuGre pre-sliding friction, and fixed-step simulation.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magact/config.hpp"
#include "magact/constants.hpp"

namespace magact {

/// Lumped electromechanical constants. Ks and Kd are the total stiffness and
/// damping seen by the linear model; krest generates the nonlinear restoring
/// torque (ks = 2 krest when no friction stiffness is folded in). When a
/// simulation adds the LuGre state explicitly, Kd must hold the viscous part
/// alone so the bristle damping is not counted twice.
struct LumpedElectromech {
  double J = 0;      // inertia [kg·m²]
  double Kd = 0;     // damping [N·m·s/rad]
  double Ks = 0;     // stiffness [N·m/rad]
  double kt = 0;     // torque constant [N·m/A]
  double kb = 0;     // back-emf constant [V·s/rad], = kt
  double krest = 0;  // peak restoration torque [N·m]
  double R = 0;      // series resistance [ohm]
  double Lc0 = 0;    // low-frequency inductance [H]

  void validate() const {
    if (!(J > 0)) throw std::invalid_argument("inertia must be > 0");
    if (Ks < 0 || Kd < 0 || R < 0 || Lc0 < 0)
      throw std::invalid_argument("Ks, Kd, R, Lc0 must be >= 0");
    if (kb != kt) throw std::invalid_argument("kb must equal kt");
  }

  double electrical_time_constant() const { return Lc0 / R; }

  /// General-purpose lump from a parsed config: total stiffness/damping,
  /// series resistance Rc + Rs.
  static LumpedElectromech from_config(const Config& cfg) {
    const MeasuredConstants& m = cfg.require_measured();
    LumpedElectromech p;
    p.J = m.inertia;
    p.Kd = m.total_damping;
    p.Ks = m.total_stiffness;
    p.kt = m.torque_constant;
    p.kb = m.torque_constant;
    p.krest = m.restoration_peak();
    p.R = cfg.actuator.series_resistance();
    p.Lc0 = cfg.actuator.low_freq_inductance;
    p.validate();
    return p;
  }

  /// Variant for simulations that carry the LuGre state: the bristle damping
  /// is removed from Kd (it re-enters through the friction force).
  static LumpedElectromech from_config_for_friction(const Config& cfg) {
    LumpedElectromech p = from_config(cfg);
    const LuGreParams& l = cfg.require_lugre();
    p.Kd = std::max(0.0, p.Kd - l.sigma_d);
    return p;
  }
};

/// System state: rotor angle, angular velocity, coil current, and the
/// optional friction bristle state.
struct StateVector {
  double beta = 0;     // [rad]
  double omega_r = 0;  // [rad/s]
  double i_c = 0;      // [A]
  std::optional<double> z;  // [rad]
};

struct DriveInputs {
  double voltage = 0;      // v_c [V]
  double load_torque = 0;  // T_L [N·m], positive opposes motion
};

namespace detail {

inline std::array<double, 3> rhs3(const std::array<double, 3>& x, double v_c,
                                  double load, const LumpedElectromech& p) {
  const double s = std::sin(x[0]);
  return {x[1],
          (-p.Kd * x[1] + p.kt * x[2] * s + p.krest * std::sin(2.0 * x[0]) - load) / p.J,
          (-p.R * x[2] - p.kt * x[1] * s + v_c) / p.Lc0};
}

}  // namespace detail

/// Right-hand side of the nonlinear model (angle, velocity, current).
inline StateVector nonlinear_rhs(const StateVector& x, const DriveInputs& u,
                                 const LumpedElectromech& p) {
  if (!(p.Lc0 > 0))
    throw std::invalid_argument("nonlinear_rhs: Lc0 = 0 is electrically degenerate");
  const auto f = detail::rhs3({x.beta, x.omega_r, x.i_c}, u.voltage, u.load_torque, p);
  return {f[0], f[1], f[2], std::nullopt};
}

using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat32 = std::array<std::array<double, 2>, 3>;

/// Analytic Jacobian of the nonlinear right-hand side at an arbitrary state.
inline Mat3 rhs_jacobian(const StateVector& x, const LumpedElectromech& p) {
  const double s = std::sin(x.beta), c = std::cos(x.beta);
  Mat3 a{};
  a[0] = {0.0, 1.0, 0.0};
  a[1] = {(p.kt * x.i_c * c + 2.0 * p.krest * std::cos(2.0 * x.beta)) / p.J,
          -p.Kd / p.J, p.kt * s / p.J};
  a[2] = {-p.kt * x.omega_r * c / p.Lc0, -p.kt * s / p.Lc0, -p.R / p.Lc0};
  return a;
}

/// Roots of s³ + a2 s² + a1 s + a0 (Cardano, complex arithmetic).
inline std::array<cplx, 3> cubic_roots(double a2, double a1, double a0) {
  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  const cplx disc = cplx(q * q / 4.0 + p * p * p / 27.0, 0.0);
  const cplx s = std::sqrt(disc);
  cplx u3 = -q / 2.0 + s;
  if (std::abs(u3) < 1e-300) u3 = -q / 2.0 - s;
  std::array<cplx, 3> roots;
  if (std::abs(u3) < 1e-300) {
    roots.fill(cplx(-a2 / 3.0, 0.0));
    return roots;
  }
  const cplx u = std::exp(std::log(u3) / 3.0);
  const cplx v = -p / (3.0 * u);
  const cplx w(-0.5, 0.5 * std::sqrt(3.0));
  cplx rot(1.0, 0.0);
  for (int k = 0; k < 3; ++k, rot *= w)
    roots[k] = rot * u + v / rot - a2 / 3.0;
  return roots;
}

/// Eigenvalues of a 3x3 matrix via its characteristic cubic.
inline std::array<cplx, 3> eigenvalues_3x3(const Mat3& a) {
  const double tr = a[0][0] + a[1][1] + a[2][2];
  const double m00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const double m11 = a[0][0] * a[2][2] - a[0][2] * a[2][0];
  const double m22 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const double det = a[0][0] * m00 - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  // char poly: s^3 - tr s^2 + (sum of principal minors) s - det
  return cubic_roots(-tr, m00 + m11 + m22, -det);
}

struct Equilibrium {
  StateVector x;
  bool stable = false;
  std::array<cplx, 3> eigenvalues{};
};

/// The four zero-input equilibria in [0, 2 pi), with stability decided from
/// the eigenvalues of the local Jacobian (all real parts negative).
inline std::vector<Equilibrium> equilibria(const LumpedElectromech& p) {
  std::vector<Equilibrium> out;
  for (double beta : {0.0, 0.5 * pi, pi, 1.5 * pi}) {
    Equilibrium e;
    e.x = {beta, 0.0, 0.0, std::nullopt};
    e.eigenvalues = eigenvalues_3x3(rhs_jacobian(e.x, p));
    e.stable = true;
    for (const cplx& ev : e.eigenvalues)
      if (!(ev.real() < 0)) e.stable = false;
    out.push_back(e);
  }
  return out;
}

/// Linear state-space model about the maximum torque per ampere position,
/// states (theta, omega_r, i_c), inputs (v_c, T_L), output theta.
struct LinearModel {
  Mat3 A{};
  Mat32 B{};
  std::array<double, 3> C{};
  StateVector equilibrium;
};

inline LinearModel linearize(const LumpedElectromech& p) {
  if (!(p.Lc0 > 0)) throw std::invalid_argument("linearize: Lc0 must be > 0");
  LinearModel m;
  m.A[0] = {0.0, 1.0, 0.0};
  m.A[1] = {-p.Ks / p.J, -p.Kd / p.J, p.kt / p.J};
  m.A[2] = {0.0, -p.kt / p.Lc0, -p.R / p.Lc0};
  m.B[0] = {0.0, 0.0};
  m.B[1] = {0.0, -1.0 / p.J};
  m.B[2] = {1.0 / p.Lc0, 0.0};
  m.C = {1.0, 0.0, 0.0};
  m.equilibrium = {0.5 * pi, 0.0, 0.0, std::nullopt};
  return m;
}

/// Real-coefficient rational transfer function, ascending powers of s.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;

  void validate() const {
    if (den.empty() || den.back() == 0.0)
      throw std::invalid_argument("transfer function needs a nonzero leading denominator");
  }

  cplx eval(cplx s) const {
    auto horner = [&](const std::vector<double>& c) {
      cplx acc(0.0, 0.0);
      for (std::size_t k = c.size(); k-- > 0;) acc = acc * s + c[k];
      return acc;
    };
    return horner(num) / horner(den);
  }

  cplx at_omega(double omega) const { return eval(cplx(0.0, omega)); }
};

/// Current-to-position dynamics H_m(s) = kt / (J s² + Kd s + Ks).
inline TransferFunction mech_tf(const LumpedElectromech& p) {
  TransferFunction tf{{p.kt}, {p.Ks, p.Kd, p.J}};
  tf.validate();
  return tf;
}

/// Natural frequency and damping ratio of the mechanical dynamics.
inline std::pair<double, double> natural_freq_damping(const LumpedElectromech& p) {
  const double omega_n = std::sqrt(p.Ks / p.J);
  const double zeta = p.Kd / (2.0 * p.J * omega_n);
  return {omega_n, zeta};
}

/// Voltage-to-current dynamics with back-emf coupling (third order). The
/// s-coefficient follows from expanding (Lc0 s + R)(J s² + Kd s + Ks) + kt² s.
inline TransferFunction elec_tf_full(const LumpedElectromech& p) {
  TransferFunction tf{{p.Ks, p.Kd, p.J},
                      {p.R * p.Ks, p.R * p.Kd + p.Lc0 * p.Ks + p.kt * p.kt,
                       p.R * p.J + p.Lc0 * p.Kd, p.Lc0 * p.J}};
  tf.validate();
  return tf;
}

/// Voltage-to-current dynamics with the back-emf ignored: 1/(Lc0 s + R).
inline TransferFunction elec_tf_rl(const LumpedElectromech& p) {
  TransferFunction tf{{1.0}, {p.R, p.Lc0}};
  tf.validate();
  return tf;
}

// ---------------------------------------------------------------------------
// LuGre pre-sliding friction
// ---------------------------------------------------------------------------

/// Steady-state friction level g(v) = Fc + (Fs - Fc) exp(-(v/vs)²).
inline double stribeck(double v, const LuGreParams& lp) {
  const double r = v / lp.stribeck_velocity;
  return lp.coulomb + (lp.breakaway - lp.coulomb) * std::exp(-r * r);
}

/// Bristle state dynamics dz/dt = v - sigma_s |v| z / g(v).
inline double lugre_rhs(double v, double z, const LuGreParams& lp) {
  return v - lp.sigma_s * std::abs(v) * z / stribeck(v, lp);
}

/// Friction torque F_f = sigma_s z + sigma_d dz/dt.
inline double lugre_force(double v, double z, const LuGreParams& lp) {
  return lp.sigma_s * z + lp.sigma_d * lugre_rhs(v, z, lp);
}

/// Small-signal equivalent of the friction: a stiffness and a damping.
inline std::pair<double, double> lugre_linearized(const LuGreParams& lp) {
  return {lp.sigma_s, lp.sigma_d};
}

/// Mechanical dynamics with the linearized friction folded in:
/// kt / (J s² + (Kd + sigma_d) s + (Ks + sigma_s)). Here p carries the
/// friction-free damping and stiffness.
inline TransferFunction augmented_mech_tf(const LumpedElectromech& p,
                                          const LuGreParams& lp) {
  TransferFunction tf{{p.kt}, {p.Ks + lp.sigma_s, p.Kd + lp.sigma_d, p.J}};
  tf.validate();
  return tf;
}

// ---------------------------------------------------------------------------
// Time-domain simulation (classical fixed-step 4th-order Runge-Kutta)
// ---------------------------------------------------------------------------

/// Raised when the state leaves the finite range; carries the failing step.
struct simulate_error : std::runtime_error {
  long step = 0;
  simulate_error(long step_, const std::string& state_text)
      : std::runtime_error("non-finite state at step " + std::to_string(step_) +
                           ": " + state_text),
        step(step_) {}
};

/// Time-varying scalar drive signal.
struct DriveSignal {
  enum class Kind { zero, step, sine, chirp };
  Kind kind = Kind::zero;
  double amplitude = 0;
  double freq_hz = 0;    // sine frequency / chirp start frequency
  double freq1_hz = 0;   // chirp end frequency
  double phase = 0;      // [rad]
  double duration = 0;   // chirp sweep time [s]

  double operator()(double t) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::step: return t >= 0.0 ? amplitude : 0.0;
      case Kind::sine: return amplitude * std::sin(two_pi * freq_hz * t + phase);
      case Kind::chirp: {
        // Linear chirp; the instantaneous frequency passes freq1_hz at t = duration.
        const double k = duration > 0 ? (freq1_hz - freq_hz) / duration : 0.0;
        return amplitude * std::sin(two_pi * (freq_hz * t + 0.5 * k * t * t));
      }
    }
    return 0.0;
  }

  static DriveSignal zero() { return {}; }
  static DriveSignal step(double amplitude) {
    DriveSignal d;
    d.kind = Kind::step;
    d.amplitude = amplitude;
    return d;
  }
  static DriveSignal sine(double amplitude, double freq_hz, double phase = 0.0) {
    DriveSignal d;
    d.kind = Kind::sine;
    d.amplitude = amplitude;
    d.freq_hz = freq_hz;
    d.phase = phase;
    return d;
  }
  static DriveSignal chirp(double amplitude, double f0_hz, double f1_hz, double duration) {
    DriveSignal d;
    d.kind = Kind::chirp;
    d.amplitude = amplitude;
    d.freq_hz = f0_hz;
    d.freq1_hz = f1_hz;
    d.duration = duration;
    return d;
  }
};

struct SimOptions {
  double dt = 0;
  double t_end = 0;
  int decimation = 1;  // record every n-th step
  bool enforce_stiffness_guard = true;
};

struct Trajectory {
  std::vector<double> t, beta, omega_r, i_c, z;
  bool has_z = false;
  std::size_t size() const { return t.size(); }
};

/// One classical RK4 step of a fixed-size system.
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const Rhs& rhs, double t, const std::array<double, N>& x,
                               double dt) {
  const auto k1 = rhs(t, x);
  std::array<double, N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  const auto k2 = rhs(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  const auto k3 = rhs(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + dt * k3[i];
  const auto k4 = rhs(t + dt, tmp);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
  return out;
}

namespace detail {

template <std::size_t N, class Rhs, class Record>
void run_fixed_step(const Rhs& rhs, std::array<double, N> x, const SimOptions& opts,
                    const Record& record) {
  if (!(opts.dt > 0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (!(opts.t_end >= opts.dt)) throw std::invalid_argument("simulate: t_end < dt");
  const long nsteps = static_cast<long>(std::llround(opts.t_end / opts.dt));
  record(0.0, x);
  for (long i = 1; i <= nsteps; ++i) {
    const double t = (i - 1) * opts.dt;
    x = rk4_step<N>(rhs, t, x, opts.dt);
    for (double v : x)
      if (!std::isfinite(v)) {
        std::ostringstream ss;
        for (double u : x) ss << u << ' ';
        throw simulate_error(i, ss.str());
      }
    if (i % opts.decimation == 0 || i == nsteps) record(i * opts.dt, x);
  }
}

inline void check_guard(const LumpedElectromech& p, const SimOptions& opts,
                        bool electrical_active) {
  if (!opts.enforce_stiffness_guard) return;
  double limit = std::numeric_limits<double>::infinity();
  if (electrical_active && p.R > 0) limit = std::min(limit, p.electrical_time_constant());
  if (p.Ks > 0) limit = std::min(limit, std::sqrt(p.J / p.Ks));
  limit /= 5.0;
  if (opts.dt > limit) {
    std::ostringstream ss;
    ss << "simulate: dt = " << opts.dt << " exceeds the stiffness guard "
       << limit << " (pass force to override)";
    throw std::invalid_argument(ss.str());
  }
}

}  // namespace detail

/// Voltage-driven simulation of the full model; the LuGre state is appended
/// as a fourth state when friction parameters are supplied.
inline Trajectory simulate_voltage(const LumpedElectromech& p, const DriveSignal& drive_v,
                                   const DriveSignal& drive_load, const StateVector& x0,
                                   const SimOptions& opts,
                                   const LuGreParams* lugre = nullptr) {
  if (!(p.Lc0 > 0)) throw std::invalid_argument("simulate: Lc0 must be > 0");
  detail::check_guard(p, opts, true);
  Trajectory out;
  out.has_z = lugre != nullptr;
  auto record3 = [&](double t, const std::array<double, 3>& x) {
    out.t.push_back(t);
    out.beta.push_back(x[0]);
    out.omega_r.push_back(x[1]);
    out.i_c.push_back(x[2]);
  };
  if (!lugre) {
    auto rhs = [&](double t, const std::array<double, 3>& x) {
      return detail::rhs3(x, drive_v(t), drive_load(t), p);
    };
    detail::run_fixed_step<3>(rhs, {x0.beta, x0.omega_r, x0.i_c}, opts, record3);
  } else {
    const LuGreParams lp = *lugre;
    auto rhs = [&](double t, const std::array<double, 4>& x) -> std::array<double, 4> {
      const double dz = lugre_rhs(x[1], x[3], lp);
      const double ff = lp.sigma_s * x[3] + lp.sigma_d * dz;
      auto f = detail::rhs3({x[0], x[1], x[2]}, drive_v(t), drive_load(t), p);
      f[1] -= ff / p.J;
      return {f[0], f[1], f[2], dz};
    };
    auto record = [&](double t, const std::array<double, 4>& x) {
      record3(t, {x[0], x[1], x[2]});
      out.z.push_back(x[3]);
    };
    detail::run_fixed_step<4>(rhs, {x0.beta, x0.omega_r, x0.i_c, x0.z.value_or(0.0)},
                              opts, record);
  }
  return out;
}

/// Current-driven simulation: the coil current is prescribed (ideal current
/// source), only the mechanical states (and optionally the bristle state)
/// integrate. Covers the open-coil case with a zero drive.
inline Trajectory simulate_current(const LumpedElectromech& p, const DriveSignal& drive_i,
                                   const DriveSignal& drive_load, const StateVector& x0,
                                   const SimOptions& opts,
                                   const LuGreParams* lugre = nullptr) {
  detail::check_guard(p, opts, false);
  Trajectory out;
  out.has_z = lugre != nullptr;
  auto mech_accel = [&](double t, double beta, double omega) {
    return (-p.Kd * omega + p.kt * drive_i(t) * std::sin(beta) +
            p.krest * std::sin(2.0 * beta) - drive_load(t)) / p.J;
  };
  if (!lugre) {
    auto rhs = [&](double t, const std::array<double, 2>& x) -> std::array<double, 2> {
      return {x[1], mech_accel(t, x[0], x[1])};
    };
    auto record = [&](double t, const std::array<double, 2>& x) {
      out.t.push_back(t);
      out.beta.push_back(x[0]);
      out.omega_r.push_back(x[1]);
      out.i_c.push_back(drive_i(t));
    };
    detail::run_fixed_step<2>(rhs, {x0.beta, x0.omega_r}, opts, record);
  } else {
    const LuGreParams lp = *lugre;
    auto rhs = [&](double t, const std::array<double, 3>& x) -> std::array<double, 3> {
      const double dz = lugre_rhs(x[1], x[2], lp);
      const double ff = lp.sigma_s * x[2] + lp.sigma_d * dz;
      return {x[1], mech_accel(t, x[0], x[1]) - ff / p.J, dz};
    };
    auto record = [&](double t, const std::array<double, 3>& x) {
      out.t.push_back(t);
      out.beta.push_back(x[0]);
      out.omega_r.push_back(x[1]);
      out.i_c.push_back(drive_i(t));
      out.z.push_back(x[2]);
    };
    detail::run_fixed_step<3>(rhs, {x0.beta, x0.omega_r, x0.z.value_or(0.0)}, opts,
                              record);
  }
  return out;
}

/// Conserved quantity of the undriven frictionless rotor,
/// E = ½ J omega² + (krest/2) cos(2 beta).
inline double mechanical_energy(double beta, double omega_r, const LumpedElectromech& p) {
  return 0.5 * p.J * omega_r * omega_r + 0.5 * p.krest * std::cos(2.0 * beta);
}

}  // namespace magact
