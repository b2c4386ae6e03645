#pragma once

// Parameter extraction from frequency-response and hysteresis-loop data:
// mechanical constants from a current-to-position FRF, electrical constants
// from a voltage-to-current FRF (2/3/4 degrees of freedom), loop stiffness,
// and phase-error reporting between model and data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magact/constants.hpp"
#include "magact/eddy.hpp"

namespace magact {

struct identify_error : std::runtime_error {
  enum class code {
    no_plateau,
    no_mass_asymptote,
    no_resonance,
    no_inductive_asymptote,
    nonconvergence,
    out_of_range,
    insufficient_cycle,
  };
  code kind;
  identify_error(code kind_, const std::string& msg)
      : std::runtime_error(msg), kind(kind_) {}
};

inline const char* to_string(identify_error::code c) {
  switch (c) {
    case identify_error::code::no_plateau: return "NO_PLATEAU";
    case identify_error::code::no_mass_asymptote: return "NO_MASS_ASYMPTOTE";
    case identify_error::code::no_resonance: return "NO_RESONANCE";
    case identify_error::code::no_inductive_asymptote: return "NO_INDUCTIVE_ASYMPTOTE";
    case identify_error::code::nonconvergence: return "NONCONVERGENCE";
    case identify_error::code::out_of_range: return "OUT_OF_RANGE";
    case identify_error::code::insufficient_cycle: return "INSUFFICIENT_CYCLE";
  }
  return "?";
}

enum class FrfKind { mechanical, electrical };

/// Sampled frequency response, strictly increasing positive frequencies.
struct FrfDataset {
  FrfKind kind = FrfKind::electrical;
  std::vector<ComplexResponse> points;
  std::optional<double> excitation_amplitude;

  static FrfDataset from_pairs(FrfKind kind,
                               const std::vector<std::pair<double, cplx>>& samples) {
    FrfDataset d;
    d.kind = kind;
    d.points.reserve(samples.size());
    for (const auto& [w, h] : samples) d.points.push_back({w, h});
    d.validate();
    return d;
  }

  void validate() const {
    if (points.size() < 8)
      throw std::invalid_argument("FrfDataset: at least 8 points required");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].omega > 0))
        throw std::invalid_argument("FrfDataset: frequencies must be > 0");
      if (i > 0 && !(points[i].omega > points[i - 1].omega))
        throw std::invalid_argument("FrfDataset: frequencies must be strictly increasing");
    }
  }
};

struct MechIdentResult {
  double Ks = 0;       // [N·m/rad]
  double J = 0;        // [kg·m²]
  double omega_n = 0;  // [rad/s]
  double zeta = 0;
  double Kd = 0;       // [N·m·s/rad]
  double fit_residual = 0;

  void validate() const {
    if (!(Ks > 0 && J > 0 && omega_n > 0 && zeta > 0 && Kd > 0))
      throw std::logic_error("MechIdentResult: non-positive parameter");
    if (std::abs(omega_n * omega_n - Ks / J) > 1e-9 * Ks / J ||
        std::abs(Kd - 2.0 * J * omega_n * zeta) > 1e-9 * Kd)
      throw std::logic_error("MechIdentResult: internal relations violated");
  }
};

struct ElecIdentResult {
  double R = 0;    // [ohm]
  double Lc0 = 0;  // [H]
  double musigma_iron = 0;    // [s/m²], 0 for dof = 2
  double musigma_magnet = 0;  // [s/m²], 0 for dof <= 3
  int dof = 2;
  double fit_residual = 0;
  SlabGeometry slab;  // geometry the eddy terms were evaluated with
  std::vector<std::string> warnings;

  cplx model_at(double omega) const {
    EddyProducts ep{musigma_iron, musigma_magnet};
    const ElectricalModelKind kind =
        dof <= 2 ? ElectricalModelKind::rl_2dof
                 : (dof == 3 ? ElectricalModelKind::eddy_iron_3dof
                             : ElectricalModelKind::eddy_iron_magnet_4dof);
    if (dof <= 2) return 1.0 / (R + cplx(0.0, omega * Lc0));
    return electrical_admittance(omega, kind, R, Lc0, ep, slab);
  }
};

struct HysteresisLoop {
  std::vector<std::pair<double, double>> samples;  // (theta [rad], torque [N·m])
  double slope = 0;       // [N·m/rad]
  double band_width = 0;  // [N·m]
};

namespace detail {

// Local log-log magnitude slope via centered secants a few grid points wide;
// the stride smooths sample noise without hiding decade-scale features.
inline std::vector<double> loglog_slopes(const FrfDataset& d, int stride = 3) {
  const int n = static_cast<int>(d.points.size());
  stride = std::min(stride, (n - 1) / 2);
  stride = std::max(stride, 1);
  std::vector<double> s(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - stride);
    const int hi = std::min(n - 1, i + stride);
    const double dm = std::log(std::abs(d.points[hi].value)) -
                      std::log(std::abs(d.points[lo].value));
    const double dw = std::log(d.points[hi].omega) - std::log(d.points[lo].omega);
    s[i] = dm / dw;
  }
  return s;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Magnitude plateau over the lowest decade; throws `which` when not flat.
inline double plateau_magnitude(const FrfDataset& d, const std::vector<double>& slopes,
                                identify_error::code which) {
  const double w_cut = 10.0 * d.points.front().omega;
  std::vector<double> mags, absslopes;
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    if (d.points[i].omega > w_cut) break;
    mags.push_back(std::abs(d.points[i].value));
    absslopes.push_back(std::abs(slopes[i]));
  }
  if (mags.size() < 3 || median(absslopes) > 0.1)
    throw identify_error(which, std::string(to_string(which)) +
                                    ": no flat low-frequency plateau");
  return median(mags);
}

// Highest-frequency sample whose local slope sits in [target-0.1, target+0.1]
// (i.e. within 2 dB/dec of the asymptote).
inline int asymptote_index(const FrfDataset& d, const std::vector<double>& slopes,
                           double target, identify_error::code which) {
  for (int i = static_cast<int>(d.points.size()) - 1; i >= 0; --i)
    if (std::abs(slopes[i] - target) <= 0.1) return i;
  throw identify_error(which, std::string(to_string(which)) +
                                  ": no region with log-log slope near " +
                                  std::to_string(target));
}

inline double golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double tol = 1e-10) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * (1.0 + std::abs(a))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Relative complex RMS misfit between a model and the dataset.
inline double relative_residual(const std::function<cplx(double)>& model,
                                const FrfDataset& d) {
  double acc = 0.0;
  for (const auto& p : d.points) {
    const cplx e = model(p.omega) - p.value;
    acc += std::norm(e) / std::norm(p.value);
  }
  return std::sqrt(acc / d.points.size());
}

// Nelder-Mead with the seed as the first simplex vertex. Returns the best
// objective; `x` is updated in place. A round converges when the simplex
// values collapse or the best residual stops changing by more than ftol in
// relative terms; exhausting the shared iteration cap throws NONCONVERGENCE.
inline double nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double>& x, std::vector<double> step,
                          long max_iter = 10000, double ftol = 1e-10,
                          int restarts = 2) {
  const std::size_t n = x.size();
  long used = 0;
  double best_f = f(x);
  std::vector<double> best_x = x;
  for (int round = 0; round <= restarts; ++round) {
    std::vector<std::vector<double>> simplex(n + 1, best_x);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);
    bool converged = false;
    double round_best = std::min(best_f, *std::min_element(fv.begin(), fv.end()));
    int stall = 0;
    while (!converged) {
      if (++used > max_iter)
        throw identify_error(identify_error::code::nonconvergence,
                             "NONCONVERGENCE: iteration cap exhausted");
      std::vector<std::size_t> order(n + 1);
      for (std::size_t i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t ib = order[0], iw = order[n], isw = order[n - 1];
      if (fv[iw] - fv[ib] <= ftol * std::max(std::abs(fv[ib]), 1e-300)) {
        converged = true;
        break;
      }
      if (round_best - fv[ib] <= ftol * std::max(round_best, 1e-300)) {
        if (++stall >= 100) {
          converged = true;
          break;
        }
      } else {
        stall = 0;
        round_best = fv[ib];
      }
      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == iw) continue;
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;
      }
      auto blend = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j)
          p[j] = centroid[j] + coef * (simplex[iw][j] - centroid[j]);
        return p;
      };
      const auto refl = blend(-1.0);
      const double fr = f(refl);
      if (fr < fv[ib]) {
        const auto exp_ = blend(-2.0);
        const double fe = f(exp_);
        if (fe < fr) {
          simplex[iw] = exp_;
          fv[iw] = fe;
        } else {
          simplex[iw] = refl;
          fv[iw] = fr;
        }
      } else if (fr < fv[isw]) {
        simplex[iw] = refl;
        fv[iw] = fr;
      } else {
        const auto con = blend(fr < fv[iw] ? -0.5 : 0.5);
        const double fc = f(con);
        if (fc < std::min(fr, fv[iw])) {
          simplex[iw] = con;
          fv[iw] = fc;
        } else {
          for (std::size_t i = 0; i <= n; ++i) {
            if (i == ib) continue;
            for (std::size_t j = 0; j < n; ++j)
              simplex[i][j] = simplex[ib][j] + 0.5 * (simplex[i][j] - simplex[ib][j]);
            fv[i] = f(simplex[i]);
          }
        }
      }
    }
    for (std::size_t i = 0; i <= n; ++i)
      if (fv[i] < best_f) {
        best_f = fv[i];
        best_x = simplex[i];
      }
    for (auto& s : step) s *= 0.1;  // restart with a tighter simplex
  }
  x = best_x;
  return best_f;
}

}  // namespace detail

/// Mechanical constants from a current-to-position FRF. The stiffness comes
/// from the low-frequency plateau, the inertia from the -40 dB/dec region,
/// and the damping ratio from matching the resonance-peak magnitude.
inline MechIdentResult identify_mechanical(const FrfDataset& frf, double kt) {
  frf.validate();
  if (frf.kind != FrfKind::mechanical)
    throw std::invalid_argument("identify_mechanical: dataset is not a mechanical FRF");
  if (!(kt > 0)) throw std::invalid_argument("identify_mechanical: kt must be > 0");
  const auto slopes = detail::loglog_slopes(frf);

  const double g_m0 =
      detail::plateau_magnitude(frf, slopes, identify_error::code::no_plateau);
  const double Ks = kt / g_m0;

  const int ihf = detail::asymptote_index(frf, slopes, -2.0,
                                          identify_error::code::no_mass_asymptote);
  const double w_hf = frf.points[ihf].omega;
  const double J = kt / (w_hf * w_hf * std::abs(frf.points[ihf].value));
  const double omega_n = std::sqrt(Ks / J);

  double peak_data = 0.0;
  for (const auto& p : frf.points) peak_data = std::max(peak_data, std::abs(p.value));
  if (!(peak_data > 1.05 * g_m0))
    throw identify_error(identify_error::code::no_resonance,
                         "NO_RESONANCE: no resonance peak above the plateau");

  auto model_peak = [&](double zeta) {
    const double kd = 2.0 * J * omega_n * zeta;
    double peak = 0.0;
    for (const auto& p : frf.points) {
      const double w = p.omega;
      peak = std::max(peak, std::abs(kt / cplx(Ks - J * w * w, kd * w)));
    }
    return peak;
  };
  const double zeta = detail::golden_section(
      [&](double z) { return std::abs(model_peak(z) - peak_data); }, 1e-3, 2.0);

  MechIdentResult r;
  r.Ks = Ks;
  r.J = J;
  r.omega_n = omega_n;
  r.zeta = zeta;
  r.Kd = 2.0 * J * omega_n * zeta;
  r.fit_residual = detail::relative_residual(
      [&](double w) { return kt / cplx(Ks - J * w * w, r.Kd * w); }, frf);
  r.validate();
  return r;
}

/// RL constants from a voltage-to-current FRF: resistance from the DC
/// plateau, inductance from the -20 dB/dec region.
inline ElecIdentResult identify_rl(const FrfDataset& frf) {
  frf.validate();
  if (frf.kind != FrfKind::electrical)
    throw std::invalid_argument("identify_rl: dataset is not an electrical FRF");
  const auto slopes = detail::loglog_slopes(frf);
  const double plateau =
      detail::plateau_magnitude(frf, slopes, identify_error::code::no_plateau);
  ElecIdentResult r;
  r.dof = 2;
  r.R = 1.0 / plateau;
  const int ihf = detail::asymptote_index(frf, slopes, -1.0,
                                          identify_error::code::no_inductive_asymptote);
  r.Lc0 = 1.0 / (frf.points[ihf].omega * std::abs(frf.points[ihf].value));
  r.fit_residual = detail::relative_residual(
      [&](double w) { return 1.0 / cplx(r.R, w * r.Lc0); }, frf);
  return r;
}

/// Eddy-current model fit (3 or 4 degrees of freedom) by derivative-free
/// minimization of the relative complex residual, seeded from the RL fit
/// (and, for dof = 4, additionally from the 3-DoF result so the nested model
/// can never fit worse). Negative parameters are projected to zero.
inline ElecIdentResult identify_eddy(const FrfDataset& frf, int dof,
                                     const SlabGeometry& slab) {
  frf.validate();
  if (frf.kind != FrfKind::electrical)
    throw std::invalid_argument("identify_eddy: dataset is not an electrical FRF");
  if (dof != 3 && dof != 4) throw std::invalid_argument("identify_eddy: dof must be 3 or 4");
  const ElecIdentResult rl = identify_rl(frf);
  const double w_top = frf.points.back().omega;
  // Characteristic musigma scales: the value that makes each eddy factor
  // order one at the top of the measured band.
  const double half_d = slab.half_thickness;
  const double scale_iron = 1.0 / (half_d * half_d * w_top);
  const double w2 = slab.square_half_width * slab.square_half_width;
  const double scale_magnet = ((1.0 + 0.5 * pi + 0.5 * pi) * (1.0 + 0.5 * pi + 0.5 * pi) -
                               0.25 * pi * pi) / (w_top * w2);

  const std::size_t np = dof == 3 ? 3 : 4;
  // The loss products enter through |x|: the objective is even in them, so
  // the optimizer never sees a flat clamped half-space it can stall in, and
  // a sign flip lands in the mirror image of the same optimum.
  auto objective = [&](const std::vector<double>& x) {
    const double res = std::max(x[0], 1e-6 * rl.R);
    const double ind = std::max(x[1], 1e-6 * rl.Lc0);
    EddyProducts ep{std::abs(x[2]), np == 4 ? std::abs(x[3]) : 0.0};
    const ElectricalModelKind kind = np == 4 ? ElectricalModelKind::eddy_iron_magnet_4dof
                                             : ElectricalModelKind::eddy_iron_3dof;
    double acc = 0.0;
    for (const auto& p : frf.points) {
      const cplx e = electrical_admittance(p.omega, kind, res, ind, ep, slab) - p.value;
      acc += std::norm(e) / std::norm(p.value);
    }
    return acc / frf.points.size();
  };

  // Seed from the RL fit with the eddy terms both off and on: the off seed
  // preserves model nesting (the fit can never do worse than the RL point),
  // the on seed avoids stalling on the musigma = 0 plane when the skin
  // effect has dragged the RL inductance estimate low.
  std::vector<std::vector<double>> seeds;
  if (dof == 3) {
    seeds.push_back({rl.R, rl.Lc0, 0.0});
    seeds.push_back({rl.R, 1.2 * rl.Lc0, 0.5 * scale_iron});
  } else {
    seeds.push_back({rl.R, rl.Lc0, 0.0, 0.0});
    seeds.push_back({rl.R, 1.2 * rl.Lc0, 0.5 * scale_iron, 0.5 * scale_magnet});
    const ElecIdentResult three = identify_eddy(frf, 3, slab);
    seeds.push_back({three.R, three.Lc0, three.musigma_iron, 0.0});
  }
  std::vector<double> best;
  double best_f = std::numeric_limits<double>::infinity();
  for (auto seed : seeds) {
    std::vector<double> step = {0.1 * rl.R, 0.1 * rl.Lc0, 0.5 * scale_iron};
    if (np == 4) step.push_back(0.5 * scale_magnet);
    const double f = detail::nelder_mead(objective, seed, step);
    if (f < best_f) {
      best_f = f;
      best = seed;
    }
  }

  ElecIdentResult r;
  r.dof = dof;
  r.slab = slab;
  r.R = best[0];
  r.Lc0 = best[1];
  r.musigma_iron = std::abs(best[2]);
  r.musigma_magnet = np == 4 ? std::abs(best[3]) : 0.0;
  for (auto field : {&ElecIdentResult::musigma_iron, &ElecIdentResult::musigma_magnet})
    if (r.*field < 0.0) {
      r.warnings.push_back("NEGATIVE_PARAM: musigma projected to 0");
      r.*field = 0.0;
    }
  if (r.R < 0 || r.Lc0 < 0)
    throw identify_error(identify_error::code::nonconvergence,
                         "NONCONVERGENCE: fit left the feasible region");
  r.fit_residual = std::sqrt(best_f);
  return r;
}

/// Interpolated data phase at omega (linear in log-frequency, locally
/// unwrapped); throws OUT_OF_RANGE outside the measured band.
inline double data_phase_at(const FrfDataset& frf, double omega) {
  frf.validate();
  if (omega < frf.points.front().omega || omega > frf.points.back().omega)
    throw identify_error(identify_error::code::out_of_range,
                         "OUT_OF_RANGE: frequency outside the dataset");
  auto it = std::lower_bound(frf.points.begin(), frf.points.end(), omega,
                             [](const ComplexResponse& p, double w) { return p.omega < w; });
  if (it == frf.points.begin()) return std::arg(it->value);
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double p0 = std::arg(lo.value), p1 = std::arg(hi.value);
  while (p1 - p0 > pi) p1 -= two_pi;
  while (p0 - p1 > pi) p1 += two_pi;
  const double f = (std::log(omega) - std::log(lo.omega)) /
                   (std::log(hi.omega) - std::log(lo.omega));
  return p0 + f * (p1 - p0);
}

/// |arg H_model - arg H_data| at omega, in degrees.
inline double phase_error_at(const ElecIdentResult& model, const FrfDataset& data,
                             double omega) {
  double diff = std::arg(model.model_at(omega)) - data_phase_at(data, omega);
  while (diff > pi) diff -= two_pi;
  while (diff < -pi) diff += two_pi;
  return std::abs(rad_to_deg(diff));
}

/// Total-least-squares line through one or more (theta, torque) cycles;
/// the band width is the vertical spread about the fitted line.
inline HysteresisLoop loop_stiffness(const std::vector<std::pair<double, double>>& series) {
  int reversals = 0;
  double prev_d = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double d = series[i].first - series[i - 1].first;
    if (d == 0.0) continue;
    if (prev_d != 0.0 && std::signbit(d) != std::signbit(prev_d)) ++reversals;
    prev_d = d;
  }
  if (series.size() < 8 || reversals < 2)
    throw identify_error(identify_error::code::insufficient_cycle,
                         "INSUFFICIENT_CYCLE: need at least one full cycle of samples");
  double mx = 0, my = 0;
  for (const auto& [x, y] : series) {
    mx += x;
    my += y;
  }
  mx /= series.size();
  my /= series.size();
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : series) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  HysteresisLoop loop;
  loop.samples = series;
  if (sxy == 0.0) {
    loop.slope = 0.0;
  } else {
    loop.slope = (syy - sxx + std::sqrt((syy - sxx) * (syy - sxx) + 4.0 * sxy * sxy)) /
                 (2.0 * sxy);
  }
  const double intercept = my - loop.slope * mx;
  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
  for (const auto& [x, y] : series) {
    const double r = y - (loop.slope * x + intercept);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  loop.band_width = rmax - rmin;
  return loop;
}

}  // namespace magact
