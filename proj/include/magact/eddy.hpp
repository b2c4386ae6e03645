#pragma once

// Frequency-domain eddy-current models: analytical diffusion solutions in the
// laminations (1-D) and the magnet (2-D), their reduction to the lumped
// complex reluctance factors Q_i and Q_m, the coupled electric-magnetic
// circuit, and the fractional-order series form.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "magact/config.hpp"
#include "magact/constants.hpp"

namespace magact {

/// A complex response sample at one angular frequency. The value is a
/// dimensionless ratio, an admittance, an inductance, or a reluctance
/// depending on which sweep produced it.
struct ComplexResponse {
  double omega = 0;  // [rad/s]
  cplx value;
};

/// Rectangular-slab reduction of the conducting parts: lamination
/// half-thickness, magnet half-width/half-length, and the equal-area square
/// half-width used by the lumped magnet model.
struct SlabGeometry {
  double half_thickness = 0;   // d/2 [m]
  double magnet_half_width = 0;   // a = wp/2 [m]
  double magnet_half_length = 0;  // b = L/2 [m]
  double square_half_width = 0;   // w = sqrt(a b) [m]
  int lamination_count = 0;

  double thickness() const { return 2.0 * half_thickness; }

  static SlabGeometry from_config(const ActuatorConfig& cfg) {
    SlabGeometry s;
    s.half_thickness = 0.5 * cfg.lamination_thickness;
    s.magnet_half_width = 0.5 * cfg.pole_width;
    s.magnet_half_length = 0.5 * cfg.stack_length;
    s.square_half_width = std::sqrt(s.magnet_half_width * s.magnet_half_length);
    s.lamination_count = cfg.lamination_count;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(half_thickness > 0 && magnet_half_width > 0 && magnet_half_length > 0 &&
          square_half_width > 0 && lamination_count >= 1))
      throw std::invalid_argument("SlabGeometry: all dimensions must be positive");
  }
};

/// Which electrical model to evaluate: plain RL, RL plus lamination eddy
/// currents, or RL plus lamination and magnet eddy currents.
enum class ElectricalModelKind { rl_2dof, eddy_iron_3dof, eddy_iron_magnet_4dof };

inline const char* to_string(ElectricalModelKind k) {
  switch (k) {
    case ElectricalModelKind::rl_2dof: return "rl_2dof";
    case ElectricalModelKind::eddy_iron_3dof: return "eddy_iron_3dof";
    case ElectricalModelKind::eddy_iron_magnet_4dof: return "eddy_iron_magnet_4dof";
  }
  return "?";
}

namespace detail {

// tanh for arguments with non-negative real part, overflow-free; the
// large-argument asymptote tanh z -> sign(Re z) is applied beyond |Re z| > 20.
inline cplx tanh_stable(cplx z) {
  if (z.real() < 0) return -tanh_stable(-z);
  if (z.real() > 20.0) return cplx(1.0, 0.0);
  const cplx e = std::exp(-2.0 * z);
  return (1.0 - e) / (1.0 + e);
}

// tanh(z)/z with the removable singularity at z = 0 filled in.
inline cplx tanh_over(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0;
  }
  return tanh_stable(z) / z;
}

// cosh(k x)/cosh(k a), |x| <= a, Re k >= 0: evaluated through decaying
// exponentials only.
inline cplx cosh_ratio(cplx k, double x, double a) {
  const cplx e1 = std::exp(k * (x - a));
  const cplx e2 = std::exp(-k * (x + a));
  const cplx d = 1.0 + std::exp(-2.0 * k * a);
  return (e1 + e2) / d;
}

// sinh(k x)/cosh(k a) under the same constraints.
inline cplx sinh_ratio(cplx k, double x, double a) {
  const cplx e1 = std::exp(k * (x - a));
  const cplx e2 = std::exp(-k * (x + a));
  const cplx d = 1.0 + std::exp(-2.0 * k * a);
  return (e1 - e2) / d;
}

inline void check_odd_truncation(int n_max) {
  if (n_max < 1 || n_max % 2 == 0)
    throw std::invalid_argument("series truncation n_max must be odd and >= 1");
}

}  // namespace detail

/// Default odd-harmonic truncation for the 2-D magnet series.
inline constexpr int default_series_n_max = 101;

/// Complex diffusion wavenumber alpha = sqrt(j omega mu sigma), principal
/// root (argument +45 degrees for omega > 0).
inline cplx diffusion_wavenumber(double omega, double musigma) {
  if (omega < 0 || musigma < 0)
    throw std::invalid_argument("diffusion_wavenumber: omega and musigma must be >= 0");
  return std::sqrt(cplx(0.0, omega * musigma));
}

/// Flux ratio through one lamination of thickness d,
/// phi_hat/phi_0 = tanh(alpha d/2)/(alpha d/2); exactly 1 at omega = 0.
inline cplx lamination_flux_ratio(double omega, double musigma_iron, double thickness) {
  if (!(thickness > 0)) throw std::invalid_argument("lamination thickness must be > 0");
  if (omega == 0.0) return cplx(1.0, 0.0);
  const cplx x = diffusion_wavenumber(omega, musigma_iron) * (0.5 * thickness);
  return detail::tanh_over(x);
}

/// Normalized field profile across a lamination, B(z)/B0 = cosh(alpha z)/cosh(alpha d/2).
inline cplx lamination_field(double z, double omega, double musigma_iron, double thickness) {
  const double half = 0.5 * thickness;
  if (std::abs(z) > half * (1.0 + 1e-12))
    throw std::invalid_argument("lamination_field: |z| exceeds d/2");
  const cplx alpha = diffusion_wavenumber(omega, musigma_iron);
  return detail::cosh_ratio(alpha, z, half);
}

/// Lamination eddy factor Q_i = (d/2) sqrt(j omega mu_eff_i sigma_i); the
/// eddy reluctance is R_e,i = Rt0 Q_i. Zero at omega = 0.
inline cplx q_iron(double omega, double musigma_iron, double thickness) {
  if (!(thickness > 0)) throw std::invalid_argument("lamination thickness must be > 0");
  if (omega == 0.0) return cplx(0.0, 0.0);
  return (0.5 * thickness) * diffusion_wavenumber(omega, musigma_iron);
}

/// Induced eddy current density J_x(z) inside one lamination [A/m²] for a
/// boundary field B0.
inline cplx lamination_current_density(double z, double omega, double b0,
                                       double musigma_iron, double mu_eff_iron,
                                       double thickness) {
  const double half = 0.5 * thickness;
  if (std::abs(z) > half * (1.0 + 1e-12))
    throw std::invalid_argument("lamination_current_density: |z| exceeds d/2");
  if (!(mu_eff_iron > 0)) throw std::invalid_argument("mu_eff_iron must be > 0");
  const cplx alpha = diffusion_wavenumber(omega, musigma_iron);
  return b0 * alpha / mu_eff_iron * detail::sinh_ratio(alpha, z, half);
}

/// Normalized 2-D field in the magnet cross-section (boundary value 1),
/// truncated odd-harmonic superposition of the two half-problems.
inline cplx magnet_field_2d(double x, double z, double omega, double musigma_magnet,
                            double half_width, double half_length,
                            int n_max = default_series_n_max) {
  detail::check_odd_truncation(n_max);
  const double a = half_width, b = half_length;
  if (std::abs(x) > a * (1.0 + 1e-12) || std::abs(z) > b * (1.0 + 1e-12))
    throw std::invalid_argument("magnet_field_2d: point outside the slab");
  const cplx jwms(0.0, omega * musigma_magnet);
  cplx sum(0.0, 0.0);
  double sign = 1.0;  // sin(n pi / 2) for odd n alternates +1, -1, ...
  for (int n = 1; n <= n_max; n += 2, sign = -sign) {
    const double an = sign * 4.0 / (n * pi);
    const double kz = n * pi / (2.0 * b);
    const double kx = n * pi / (2.0 * a);
    const cplx k1n = std::sqrt(cplx(kz * kz, 0.0) + jwms);
    const cplx k2n = std::sqrt(cplx(kx * kx, 0.0) + jwms);
    sum += an * (std::cos(kz * z) * detail::cosh_ratio(k1n, x, a) +
                 std::cos(kx * x) * detail::cosh_ratio(k2n, z, b));
  }
  return sum;
}

/// Flux ratio through the magnet cross-section,
/// phi_hat/phi_0 = sum over odd n of 8/(n² pi²) [tanh(k1n a)/(k1n a) + tanh(k2n b)/(k2n b)].
inline cplx magnet_flux_ratio_series(double omega, double musigma_magnet,
                                     double half_width, double half_length,
                                     int n_max = default_series_n_max) {
  detail::check_odd_truncation(n_max);
  const double a = half_width, b = half_length;
  if (!(a > 0 && b > 0)) throw std::invalid_argument("slab half-dimensions must be > 0");
  const cplx jwms(0.0, omega * musigma_magnet);
  cplx sum(0.0, 0.0);
  for (int n = 1; n <= n_max; n += 2) {
    const double kz = n * pi / (2.0 * b);
    const double kx = n * pi / (2.0 * a);
    const cplx k1n = std::sqrt(cplx(kz * kz, 0.0) + jwms);
    const cplx k2n = std::sqrt(cplx(kx * kx, 0.0) + jwms);
    sum += 8.0 / (n * n * pi * pi) *
           (detail::tanh_over(k1n * a) + detail::tanh_over(k2n * b));
  }
  return sum;
}

/// Magnet eddy factor from the equal-area square reduction,
/// Q_m = [w sqrt((pi/2w)² + j omega mu sigma) - pi/2] / (1 + pi/2).
/// Exactly zero at omega = 0; the eddy reluctance is R_e,m = Rt0 Q_m.
inline cplx q_magnet(double omega, double musigma_magnet, double square_half_width) {
  if (!(square_half_width > 0))
    throw std::invalid_argument("square_half_width must be > 0");
  if (omega == 0.0) return cplx(0.0, 0.0);
  const double w = square_half_width;
  const double half_pi = 0.5 * pi;
  // w * sqrt((pi/2w)^2 + j w m s) evaluated as sqrt((pi/2)^2 + j w m s w^2).
  const cplx wk = std::sqrt(cplx(half_pi * half_pi, omega * musigma_magnet * w * w));
  return (wk - half_pi) / (1.0 + half_pi);
}

/// Induced eddy current density (J_x, J_z) in the magnet [A/m²] for boundary
/// field B0 = 1 T, term-wise derivative of the field series.
inline std::pair<cplx, cplx> magnet_current_density(double x, double z, double omega,
                                                    double musigma_magnet,
                                                    double mu_eff_magnet,
                                                    double half_width, double half_length,
                                                    int n_max = default_series_n_max) {
  detail::check_odd_truncation(n_max);
  if (!(mu_eff_magnet > 0)) throw std::invalid_argument("mu_eff_magnet must be > 0");
  const double a = half_width, b = half_length;
  if (std::abs(x) > a * (1.0 + 1e-12) || std::abs(z) > b * (1.0 + 1e-12))
    throw std::invalid_argument("magnet_current_density: point outside the slab");
  const cplx jwms(0.0, omega * musigma_magnet);
  cplx db_dz(0.0, 0.0), db_dx(0.0, 0.0);
  double sign = 1.0;
  for (int n = 1; n <= n_max; n += 2, sign = -sign) {
    const double an = sign * 4.0 / (n * pi);
    const double kz = n * pi / (2.0 * b);
    const double kx = n * pi / (2.0 * a);
    const cplx k1n = std::sqrt(cplx(kz * kz, 0.0) + jwms);
    const cplx k2n = std::sqrt(cplx(kx * kx, 0.0) + jwms);
    db_dz += an * (-kz * std::sin(kz * z) * detail::cosh_ratio(k1n, x, a) +
                   std::cos(kx * x) * k2n * detail::sinh_ratio(k2n, z, b));
    db_dx += an * (std::cos(kz * z) * k1n * detail::sinh_ratio(k1n, x, a) -
                   kx * std::sin(kx * x) * detail::cosh_ratio(k2n, z, b));
  }
  return {db_dz / mu_eff_magnet, -db_dx / mu_eff_magnet};
}

/// Total eddy factor for the requested model.
inline cplx total_eddy_factor(double omega, ElectricalModelKind kind,
                              const EddyProducts& products, const SlabGeometry& slab) {
  switch (kind) {
    case ElectricalModelKind::rl_2dof:
      return cplx(0.0, 0.0);
    case ElectricalModelKind::eddy_iron_3dof:
      return q_iron(omega, products.musigma_iron, slab.thickness());
    case ElectricalModelKind::eddy_iron_magnet_4dof:
      return q_iron(omega, products.musigma_iron, slab.thickness()) +
             q_magnet(omega, products.musigma_magnet, slab.square_half_width);
  }
  return cplx(0.0, 0.0);
}

/// Voltage-to-current response H_e(j omega) = (1+Q)/(R + j omega Lc0 + R Q).
/// The caller picks R: coil resistance alone for the bare coil, coil plus
/// sense resistance when matched against a measured response.
inline cplx electrical_admittance(double omega, ElectricalModelKind kind,
                                  double resistance, double inductance,
                                  const EddyProducts& products, const SlabGeometry& slab) {
  if (!(resistance > 0 && inductance > 0))
    throw std::invalid_argument("electrical_admittance: R and Lc0 must be > 0");
  const cplx q = total_eddy_factor(omega, kind, products, slab);
  return (1.0 + q) / (resistance + cplx(0.0, omega * inductance) + resistance * q);
}

/// Same response obtained through the coupled 2x2 electric-magnetic system
/// with explicit turns and reluctances; must agree with
/// electrical_admittance to machine precision.
inline cplx coupled_circuit_admittance(double omega, ElectricalModelKind kind,
                                       double resistance, double inductance,
                                       const EddyProducts& products,
                                       const SlabGeometry& slab, int turns) {
  if (turns < 1) throw std::invalid_argument("turns must be >= 1");
  const double n = static_cast<double>(turns);
  const double rt0 = n * n / inductance;
  const cplx rt = rt0 * (1.0 + total_eddy_factor(omega, kind, products, slab));
  // [ R      j w N ] [I  ]   [V]
  // [ -N     Rt    ] [phi] = [0]   =>  I/V = Rt / (R Rt + j w N²)
  const cplx det = resistance * rt + cplx(0.0, omega * n * n);
  return rt / det;
}

/// Frequency-dependent inductance L_c = Lc0 / (1 + Q); satisfies
/// H_e = 1/(R + j omega L_c).
inline cplx inductance_of_frequency(double /*omega*/, double inductance, cplx q) {
  return inductance / (1.0 + q);
}

/// Coefficients of the fractional/polynomial forms of the eddy factors:
/// Q_i(s) = c_half s^(1/2) and Q_m(s) as a Taylor polynomial about s = 0
/// (ascending coefficients, constant term zero).
struct FractionalExpansion {
  double iron_half_order_coeff = 0;  // (d/2) sqrt(mu_eff_i sigma_i)
  std::vector<double> magnet_poly;   // Q_m(s) ~ sum_k magnet_poly[k] s^k
};

inline FractionalExpansion fractional_expansion(const EddyProducts& products,
                                                const SlabGeometry& slab, int order = 2) {
  if (order < 1) throw std::invalid_argument("expansion order must be >= 1");
  FractionalExpansion f;
  f.iron_half_order_coeff = slab.half_thickness * std::sqrt(products.musigma_iron);
  // Q_m(s) = [sqrt(q + c s) - pi/2]/(1 + pi/2), q = (pi/2)^2, c = mu sigma w^2.
  // Binomial series of sqrt(1 + c s / q) gives the Taylor coefficients.
  const double w = slab.square_half_width;
  const double q = (0.5 * pi) * (0.5 * pi);
  const double c = products.musigma_magnet * w * w;
  f.magnet_poly.assign(order + 1, 0.0);
  double binom = 1.0;  // binomial(1/2, k), starting at k = 0
  double ratio_pow = 1.0;
  for (int k = 1; k <= order; ++k) {
    binom *= (0.5 - (k - 1)) / k;
    ratio_pow *= c / q;
    f.magnet_poly[k] = (0.5 * pi) * binom * ratio_pow / (1.0 + 0.5 * pi);
  }
  return f;
}

/// Evaluate the polynomial part of the expansion at complex s.
inline cplx eval_magnet_poly(const FractionalExpansion& f, cplx s) {
  cplx acc(0.0, 0.0);
  for (std::size_t k = f.magnet_poly.size(); k-- > 0;) acc = acc * s + f.magnet_poly[k];
  return acc;
}

/// Evaluate the half-order iron term at complex s (principal root).
inline cplx eval_iron_half_order(const FractionalExpansion& f, cplx s) {
  return f.iron_half_order_coeff * std::sqrt(s);
}

}  // namespace magact
