#pragma once

// Independent brute-force verifiers for the closed forms elsewhere in the
// library: finite-difference diffusion solves, torque quadrature, numerical
// Jacobians, and synthetic frequency-response generation. This header
// deliberately depends on nothing but the standard library so the oracles
// share no code path with what they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace magact::oracle {

using cplx = std::complex<double>;

struct oracle_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 1-D slab grid over [-half_width, +half_width], node count odd.
struct Grid1D {
  int n_nodes = 2001;
  double half_width = 0;

  void validate() const {
    if (n_nodes < 101 || n_nodes % 2 == 0)
      throw oracle_error("Grid1D: n_nodes must be odd and >= 101");
    if (!(half_width > 0)) throw oracle_error("Grid1D: half_width must be > 0");
  }
};

/// 2-D rectangle grid over [-a, a] x [-b, b].
struct Grid2D {
  int nx = 201;
  int nz = 201;
  double half_width_x = 0;  // a
  double half_width_z = 0;  // b

  void validate() const {
    if (nx < 51 || nz < 51) throw oracle_error("Grid2D: nx, nz must be >= 51");
    if (!(half_width_x > 0 && half_width_z > 0))
      throw oracle_error("Grid2D: half widths must be > 0");
  }
  double x_of(int i) const { return -half_width_x + i * (2.0 * half_width_x / (nx - 1)); }
  double z_of(int j) const { return -half_width_z + j * (2.0 * half_width_z / (nz - 1)); }
};

namespace detail {

// Thomas elimination for a complex tridiagonal system with constant
// off-diagonals equal to `off` and per-row diagonal `diag`.
inline std::vector<cplx> solve_const_tridiag(cplx diag, cplx off, std::vector<cplx> rhs) {
  const std::size_t n = rhs.size();
  std::vector<cplx> c(n);
  cplx d = diag;
  if (d == cplx(0.0, 0.0)) throw oracle_error("tridiagonal solve: zero pivot");
  c[0] = off / d;
  rhs[0] /= d;
  for (std::size_t i = 1; i < n; ++i) {
    d = diag - off * c[i - 1];
    if (d == cplx(0.0, 0.0)) throw oracle_error("tridiagonal solve: zero pivot");
    c[i] = off / d;
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / d;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

}  // namespace detail

/// Finite-difference field across one lamination: solves B'' = j w mu sigma B
/// with B(+-d/2) = 1, second-order central differences, direct elimination.
struct Fd1dSolution {
  Grid1D grid;
  std::vector<cplx> field;  // node values including boundaries, B0 = 1
  cplx flux_ratio;          // trapezoidal mean over the slab

  double z_of(int i) const {
    return -grid.half_width + i * (2.0 * grid.half_width / (grid.n_nodes - 1));
  }
};

inline Fd1dSolution fd_diffusion_1d_field(double omega, double musigma, Grid1D grid) {
  grid.validate();
  if (omega < 0 || musigma < 0) throw oracle_error("fd_diffusion_1d: negative input");
  const int n = grid.n_nodes;
  const double h = 2.0 * grid.half_width / (n - 1);
  const cplx q(0.0, omega * musigma);
  // Interior unknowns: B_{i-1} - (2 + q h^2) B_i + B_{i+1} = 0.
  std::vector<cplx> rhs(n - 2, cplx(0.0, 0.0));
  rhs.front() = cplx(-1.0, 0.0);
  rhs.back() = cplx(-1.0, 0.0);
  auto interior = detail::solve_const_tridiag(-(2.0 + q * h * h), cplx(1.0, 0.0),
                                              std::move(rhs));
  Fd1dSolution sol;
  sol.grid = grid;
  sol.field.resize(n);
  sol.field.front() = sol.field.back() = cplx(1.0, 0.0);
  for (int i = 1; i < n - 1; ++i) sol.field[i] = interior[i - 1];
  cplx acc = 0.5 * (sol.field.front() + sol.field.back());
  for (int i = 1; i < n - 1; ++i) acc += sol.field[i];
  sol.flux_ratio = acc * h / (2.0 * grid.half_width);
  return sol;
}

inline cplx fd_diffusion_1d(double omega, double musigma, const Grid1D& grid) {
  return fd_diffusion_1d_field(omega, musigma, grid).flux_ratio;
}

/// Finite-difference field over the magnet cross-section: 5-point complex
/// Helmholtz solve with Dirichlet value 1 on all four edges. Solved directly
/// by sine-mode decomposition along x and tridiagonal elimination along z;
/// the 5-point residual of the result is checked against 1e-12.
struct Fd2dSolution {
  Grid2D grid;
  std::vector<cplx> field;  // row-major [j * nx + i], boundaries included
  cplx flux_ratio;          // area mean (trapezoid) over the rectangle
  double residual = 0;      // max 5-point residual relative to the source

  cplx at_node(int i, int j) const { return field[static_cast<std::size_t>(j) * grid.nx + i]; }

  /// Value at the node nearest to (x, z).
  cplx at(double x, double z) const {
    const double hx = 2.0 * grid.half_width_x / (grid.nx - 1);
    const double hz = 2.0 * grid.half_width_z / (grid.nz - 1);
    int i = static_cast<int>(std::lround((x + grid.half_width_x) / hx));
    int j = static_cast<int>(std::lround((z + grid.half_width_z) / hz));
    i = std::min(std::max(i, 0), grid.nx - 1);
    j = std::min(std::max(j, 0), grid.nz - 1);
    return at_node(i, j);
  }
};

inline Fd2dSolution fd_diffusion_2d(double omega, double musigma, Grid2D grid) {
  grid.validate();
  if (omega < 0 || musigma < 0) throw oracle_error("fd_diffusion_2d: negative input");
  const int nx = grid.nx, nz = grid.nz;
  const int m1 = nx - 2, m2 = nz - 2;
  const double hx = 2.0 * grid.half_width_x / (nx - 1);
  const double hz = 2.0 * grid.half_width_z / (nz - 1);
  const cplx q(0.0, omega * musigma);

  // Substituting B = 1 + u makes the boundary homogeneous:
  // (-Laplacian_h + q) u = -q on the interior, u = 0 on the edges.
  // Sine modes of the discrete 1-D Laplacian along x decouple the system
  // into m1 tridiagonal problems along z.
  const double norm = 2.0 / (m1 + 1);
  std::vector<double> lambda(m1), coeff1(m1);
  std::vector<std::vector<double>> sine(m1);  // sine[k][i] = sin((i+1)(k+1)pi/(m1+1))
  for (int k = 0; k < m1; ++k) {
    const double s = std::sin((k + 1) * std::numbers::pi / (2.0 * (m1 + 1)));
    lambda[k] = 4.0 / (hx * hx) * s * s;
    sine[k].resize(m1);
    double sum = 0.0;
    for (int i = 0; i < m1; ++i) {
      sine[k][i] = std::sin((i + 1.0) * (k + 1.0) * std::numbers::pi / (m1 + 1));
      sum += sine[k][i];
    }
    coeff1[k] = norm * sum;  // sine expansion of the constant 1 along x
  }

  // Per-mode tridiagonal solves along z.
  std::vector<std::vector<cplx>> mode(m1);
  for (int k = 0; k < m1; ++k) {
    const cplx diag = 2.0 / (hz * hz) + lambda[k] + q;
    std::vector<cplx> rhs(m2, -q * coeff1[k]);
    mode[k] = detail::solve_const_tridiag(diag, cplx(-1.0 / (hz * hz), 0.0), std::move(rhs));
  }

  Fd2dSolution sol;
  sol.grid = grid;
  sol.field.assign(static_cast<std::size_t>(nx) * nz, cplx(1.0, 0.0));
  for (int j = 1; j < nz - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      cplx u(0.0, 0.0);
      for (int k = 0; k < m1; ++k) u += sine[k][i - 1] * mode[k][j - 1];
      sol.field[static_cast<std::size_t>(j) * nx + i] = 1.0 + u;
    }

  // Verify the 5-point residual of the assembled field.
  double max_res = 0.0;
  const double scale = std::max(std::abs(q), 4.0 / (hx * hx) + 4.0 / (hz * hz));
  for (int j = 1; j < nz - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      const cplx b = sol.at_node(i, j);
      const cplx lap = (sol.at_node(i - 1, j) + sol.at_node(i + 1, j) - 2.0 * b) / (hx * hx) +
                       (sol.at_node(i, j - 1) + sol.at_node(i, j + 1) - 2.0 * b) / (hz * hz);
      max_res = std::max(max_res, std::abs(lap - q * b) / scale);
    }
  sol.residual = max_res;
  if (omega > 0 && max_res > 1e-12)
    throw oracle_error("fd_diffusion_2d: residual " + std::to_string(max_res) +
                       " exceeds 1e-12");

  // Trapezoid area mean equals the flux ratio for B0 = 1.
  cplx acc(0.0, 0.0);
  for (int j = 0; j < nz; ++j) {
    const double wj = (j == 0 || j == nz - 1) ? 0.5 : 1.0;
    for (int i = 0; i < nx; ++i) {
      const double wi = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
      acc += wi * wj * sol.at_node(i, j);
    }
  }
  sol.flux_ratio = acc * hx * hz / (4.0 * grid.half_width_x * grid.half_width_z);
  return sol;
}

/// Lorentz-force torque by direct quadrature of the surface-current / stator
/// field product over the full circumference (periodic trapezoid).
inline double quadrature_coil_torque(double beta, double coil_current,
                                     const std::vector<std::pair<int, double>>& harmonics,
                                     double stack_length, double rotor_radius,
                                     double magnetization, int n_points = 10000) {
  if (n_points < 1000) throw oracle_error("quadrature_coil_torque: n_points < 1000");
  const double dphi = 2.0 * std::numbers::pi / n_points;
  double acc = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double phi = i * dphi;
    double b = 0.0;
    for (const auto& [n, kn] : harmonics) b += kn * coil_current * std::sin(n * phi);
    acc += std::cos(phi - beta) * b;
  }
  return stack_length * rotor_radius * rotor_radius * magnetization * acc * dphi;
}

/// Central-difference Jacobians (A, B) of a 3-state, 2-input right-hand side.
template <class Rhs>
std::pair<std::array<std::array<double, 3>, 3>, std::array<std::array<double, 2>, 3>>
numerical_jacobian(const Rhs& rhs, const std::array<double, 3>& x_eq,
                   const std::array<double, 2>& u_eq, double h = 1e-7) {
  if (!(h > 0)) throw oracle_error("numerical_jacobian: h must be > 0");
  std::array<std::array<double, 3>, 3> a{};
  std::array<std::array<double, 2>, 3> b{};
  for (int j = 0; j < 3; ++j) {
    const double hj = h * std::max(1.0, std::abs(x_eq[j]));
    auto xp = x_eq, xm = x_eq;
    xp[j] += hj;
    xm[j] -= hj;
    const auto fp = rhs(xp, u_eq), fm = rhs(xm, u_eq);
    for (int i = 0; i < 3; ++i) a[i][j] = (fp[i] - fm[i]) / (2.0 * hj);
  }
  for (int j = 0; j < 2; ++j) {
    const double hj = h * std::max(1.0, std::abs(u_eq[j]));
    auto up = u_eq, um = u_eq;
    up[j] += hj;
    um[j] -= hj;
    const auto fp = rhs(x_eq, up), fm = rhs(x_eq, um);
    for (int i = 0; i < 3; ++i) b[i][j] = (fp[i] - fm[i]) / (2.0 * hj);
  }
  return {a, b};
}

/// Evaluate a frequency-response model over a grid, optionally corrupted by
/// multiplicative complex Gaussian noise (deterministic per seed).
inline std::vector<std::pair<double, cplx>> synth_frf(
    const std::function<cplx(double)>& model, const std::vector<double>& omega_grid,
    double noise_level = 0.0, unsigned seed = 0) {
  for (std::size_t i = 1; i < omega_grid.size(); ++i)
    if (!(omega_grid[i] > omega_grid[i - 1]))
      throw oracle_error("synth_frf: omega grid must be strictly increasing");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::pair<double, cplx>> out;
  out.reserve(omega_grid.size());
  for (double w : omega_grid) {
    cplx h = model(w);
    if (noise_level > 0.0) {
      const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
      const cplx eps(noise_level * gauss(rng) * inv_sqrt2,
                     noise_level * gauss(rng) * inv_sqrt2);
      h *= 1.0 + eps;
    }
    out.emplace_back(w, h);
  }
  return out;
}

/// Convenience: log-spaced angular-frequency grid.
inline std::vector<double> log_omega_grid(double omega_min, double omega_max, int points) {
  if (!(omega_min > 0 && omega_max > omega_min && points >= 2))
    throw oracle_error("log_omega_grid: invalid range");
  std::vector<double> w(points);
  const double l0 = std::log(omega_min), l1 = std::log(omega_max);
  for (int i = 0; i < points; ++i)
    w[i] = std::exp(l0 + (l1 - l0) * i / (points - 1));
  return w;
}

}  // namespace magact::oracle
