// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances and runtime budgets are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "magact/config.hpp"
#include "magact/csv.hpp"
#include "magact/dynamics.hpp"
#include "magact/eddy.hpp"
#include "magact/identify.hpp"
#include "magact/magnetics.hpp"
#include "magact/oracle.hpp"

using namespace magact;
namespace orc = magact::oracle;

namespace {

int failures = 0;

void run_criterion(int number, const std::string& name, double budget_s,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    pass = false;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (elapsed > budget_s) {
    pass = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over budget ") +
              std::to_string(budget_s) + " s";
  }
  if (!pass) ++failures;
  std::printf("%s criterion %2d: %s (%.2f s)%s%s\n", pass ? "PASS" : "FAIL", number,
              name.c_str(), elapsed, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

bool close(double a, double b, double tol_abs) { return std::abs(a - b) <= tol_abs; }

Config table1() { return load_config(TABLEI_CFG_PATH); }

const double kR = 1.86, kL = 295e-6, kMsI = 3.2035, kMsM = 2.8227;

std::function<cplx(double)> elec4_model(const SlabGeometry& slab) {
  return [slab](double w) {
    return electrical_admittance(w, ElectricalModelKind::eddy_iron_magnet_4dof, kR, kL,
                                 {kMsI, kMsM}, slab);
  };
}

FrfDataset synth_elec(double noise, unsigned seed, const SlabGeometry& slab) {
  const auto grid = orc::log_omega_grid(hz_to_rad(1.0), hz_to_rad(1e6), 1000);
  return FrfDataset::from_pairs(FrfKind::electrical,
                                orc::synth_frf(elec4_model(slab), grid, noise, seed));
}

FrfDataset synth_mech(double noise, unsigned seed, const MeasuredConstants& m) {
  const auto grid = orc::log_omega_grid(hz_to_rad(1.0), hz_to_rad(20e3), 250);
  return FrfDataset::from_pairs(
      FrfKind::mechanical,
      orc::synth_frf(
          [&](double w) {
            return m.torque_constant /
                   cplx(m.total_stiffness - m.inertia * w * w, m.total_damping * w);
          },
          grid, noise, seed));
}

}  // namespace

int main() {
  const Config cfg = table1();
  const ActuatorConfig& act = cfg.actuator;
  const MeasuredConstants& meas = *cfg.measured;
  const SlabGeometry slab = SlabGeometry::from_config(act);
  const LumpedElectromech params = LumpedElectromech::from_config(cfg);

  run_criterion(1, "bundled-config consistency", 1.0, [&](std::string& detail) {
    const double ks = meas.magnetic_spring;
    const double krest = meas.restoration_peak();
    const auto [omega_n, zeta] = natural_freq_damping(params);
    (void)zeta;
    const double tau_e = params.electrical_time_constant();
    const double dc_gain = std::abs(mech_tf(params).at_omega(0.0));
    char buf[160];
    std::snprintf(buf, sizeof buf, "ks=%.4g omega_n=%.4f tau_e=%.4gus dc=%.4f", ks,
                  omega_n, tau_e * 1e6, dc_gain);
    detail = buf;
    return ks == 2.0 * krest && close(ks, 0.636e-3, 1e-9) &&
           close(omega_n, 887.6, 0.5) && close(tau_e, 150.5e-6, 0.5e-6) &&
           close(dc_gain, 1.466, 0.005);
  });

  run_criterion(2, "torque quadrature vs closed form", 5.0, [&](std::string& detail) {
    const double m0 = act.magnetization();
    const double k1 = StatorFieldSpectrum::from_torque_constant(
                          meas.torque_constant, act.stack_length, act.rotor_radius, m0)
                          .fundamental();
    std::mt19937 rng(0);
    std::uniform_real_distribution<double> ang(-pi, pi), cur(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      double beta = ang(rng);
      while (std::abs(std::sin(beta)) < 0.05) beta = ang(rng);
      double ic = cur(rng);
      while (std::abs(ic) < 0.05) ic = cur(rng);
      const double quad = orc::quadrature_coil_torque(beta, ic, {{1, k1}},
                                                      act.stack_length, act.rotor_radius,
                                                      m0, 10000);
      const double closed = coil_torque(beta, ic, meas.torque_constant);
      worst = std::max(worst, std::abs(quad - closed) / std::abs(closed));
    }
    const double fundamental = meas.torque_constant;  // beta = pi/2, ic = 1
    double worst_harmonic = 0.0;
    for (int n : {3, 5, 7}) {
      const double t = orc::quadrature_coil_torque(pi / 2.0, 1.0, {{n, k1}},
                                                   act.stack_length, act.rotor_radius, m0,
                                                   10000);
      worst_harmonic = std::max(worst_harmonic, std::abs(t) / fundamental);
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max rel=%.3g, max harmonic leak=%.3g", worst,
                  worst_harmonic);
    detail = buf;
    return worst < 1e-9 && worst_harmonic < 1e-9;
  });

  run_criterion(3, "1-D diffusion analytic vs finite differences", 5.0,
                [&](std::string& detail) {
    const double d = act.lamination_thickness;
    const orc::Grid1D grid{2001, d / 2.0};
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double x = 1e-2 * std::pow(10.0 / 1e-2, i / 49.0);
      const double omega = std::pow(2.0 * x / d, 2) / kMsI;
      const cplx analytic = lamination_flux_ratio(omega, kMsI, d);
      const cplx fd = orc::fd_diffusion_1d(omega, kMsI, grid);
      worst = std::max(worst, std::abs(analytic - fd) / std::abs(fd));
    }
    detail = "max rel = " + std::to_string(worst);
    return worst < 0.01;
  });

  run_criterion(4, "2-D diffusion analytic vs finite differences", 60.0,
                [&](std::string& detail) {
    const double a = slab.magnet_half_width, b = slab.magnet_half_length;
    const double w2 = slab.square_half_width * slab.square_half_width;
    double worst_ratio = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double scaled = 0.01 * std::pow(20.0 / 0.01, i / 19.0);
      const double omega = scaled / (kMsM * w2);
      const cplx series = magnet_flux_ratio_series(omega, kMsM, a, b, 101);
      const cplx fd = orc::fd_diffusion_2d(omega, kMsM, {201, 201, a, b}).flux_ratio;
      worst_ratio = std::max(worst_ratio, std::abs(series - fd) / std::abs(fd));
    }
    double worst_field = 0.0;
    for (double scaled : {0.1, 1.0, 10.0}) {
      const double omega = scaled / (kMsM * w2);
      const auto sol = orc::fd_diffusion_2d(omega, kMsM, {201, 201, a, b});
      for (double fx : {-0.5, 0.0, 0.5})
        for (double fz : {-0.5, 0.0, 0.5}) {
          const cplx analytic = magnet_field_2d(fx * a, fz * b, omega, kMsM, a, b, 101);
          const cplx fd = sol.at(fx * a, fz * b);
          worst_field = std::max(worst_field, std::abs(analytic - fd) / std::abs(fd));
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max ratio rel=%.4f, max field rel=%.4f", worst_ratio,
                  worst_field);
    detail = buf;
    return worst_ratio < 0.02 && worst_field < 0.02;
  });

  run_criterion(5, "lumped eddy reduction sanity", 1.0, [&](std::string& detail) {
    const bool zero_at_dc =
        q_iron(0.0, kMsI, slab.thickness()) == cplx(0.0, 0.0) &&
        q_magnet(0.0, kMsM, slab.square_half_width) == cplx(0.0, 0.0);
    // DC-normalized magnitude gap between the lumped model and the series.
    double worst_gap = 0.0;
    const double w2 = slab.square_half_width * slab.square_half_width;
    for (int i = 0; i < 30; ++i) {
      const double scaled = 0.01 * std::pow(20.0 / 0.01, i / 29.0);
      const double omega = scaled / (kMsM * w2);
      const double lumped =
          std::abs(1.0 / (1.0 + q_magnet(omega, kMsM, slab.square_half_width)));
      const double series = std::abs(magnet_flux_ratio_series(
          omega, kMsM, slab.magnet_half_width, slab.magnet_half_length, 101));
      worst_gap = std::max(worst_gap, std::abs(lumped - series));
    }
    bool nesting = true;
    const EddyProducts iron_only{kMsI, 0.0};
    const EddyProducts none{0.0, 0.0};
    for (double omega : orc::log_omega_grid(1.0, 1e9, 60)) {
      nesting = nesting &&
                electrical_admittance(omega, ElectricalModelKind::eddy_iron_magnet_4dof,
                                      kR, kL, iron_only, slab) ==
                    electrical_admittance(omega, ElectricalModelKind::eddy_iron_3dof, kR,
                                          kL, iron_only, slab) &&
                electrical_admittance(omega, ElectricalModelKind::eddy_iron_3dof, kR, kL,
                                      none, slab) ==
                    electrical_admittance(omega, ElectricalModelKind::rl_2dof, kR, kL,
                                          none, slab);
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max normalized magnitude gap=%.4f", worst_gap);
    detail = buf;
    return zero_at_dc && worst_gap < 0.15 && nesting;
  });

  run_criterion(6, "linearization vs numerical Jacobian", 1.0, [&](std::string& detail) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      LumpedElectromech p;
      p.J = 1.65e-9 * u(rng);
      p.Kd = 4.49e-7 * u(rng);
      p.krest = 0.318e-3 * u(rng);
      p.Ks = 2.0 * p.krest;
      p.kt = 1.906e-3 * u(rng);
      p.kb = p.kt;
      p.R = 1.86 * u(rng);
      p.Lc0 = 280e-6 * u(rng);
      const LinearModel lin = linearize(p);
      auto rhs = [&](const std::array<double, 3>& x, const std::array<double, 2>& uu) {
        const StateVector f =
            nonlinear_rhs({x[0], x[1], x[2], std::nullopt}, {uu[0], uu[1]}, p);
        return std::array<double, 3>{f.beta, f.omega_r, f.i_c};
      };
      const auto [an, bn] =
          orc::numerical_jacobian(rhs, {pi / 2.0, 0.0, 0.0}, {0.0, 0.0});
      double scale_a = 0.0, scale_b = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) scale_a = std::max(scale_a, std::abs(lin.A[i][j]));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) scale_b = std::max(scale_b, std::abs(lin.B[i][j]));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          worst = std::max(worst, std::abs(an[i][j] - lin.A[i][j]) /
                                      std::max(std::abs(lin.A[i][j]), 1e-9 * scale_a));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
          worst = std::max(worst, std::abs(bn[i][j] - lin.B[i][j]) /
                                      std::max(std::abs(lin.B[i][j]), 1e-9 * scale_b));
    }
    const auto eq = equilibria(params);
    const bool labels = eq.size() == 4 && !eq[0].stable && eq[1].stable &&
                        !eq[2].stable && eq[3].stable && eq[0].x.beta == 0.0 &&
                        eq[1].x.beta == 0.5 * pi && eq[2].x.beta == pi &&
                        eq[3].x.beta == 1.5 * pi;
    detail = "max entrywise rel = " + std::to_string(worst);
    return worst < 1e-6 && labels;
  });

  run_criterion(7, "energy conservation over 100 periods", 10.0,
                [&](std::string& detail) {
    LumpedElectromech cons = params;
    cons.Kd = 0.0;
    const StateVector x0{pi / 2.0 + 0.3, 0.0, 0.0, std::nullopt};
    SimOptions pilot{1e-5, 0.1, 1, true};
    const Trajectory probe =
        simulate_current(cons, DriveSignal::zero(), DriveSignal::zero(), x0, pilot);
    std::vector<double> crossings;
    for (std::size_t i = 1; i < probe.size(); ++i)
      if (probe.omega_r[i - 1] < 0.0 && probe.omega_r[i] >= 0.0)
        crossings.push_back(probe.t[i]);
    if (crossings.size() < 3) {
      detail = "period detection failed";
      return false;
    }
    const double period = crossings[2] - crossings[1];
    SimOptions opts{period / 1000.0, 100.0 * period, 10, true};
    const Trajectory tr =
        simulate_current(cons, DriveSignal::zero(), DriveSignal::zero(), x0, opts);
    const double e0 = mechanical_energy(tr.beta[0], tr.omega_r[0], cons);
    double drift = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
      drift = std::max(drift, std::abs(mechanical_energy(tr.beta[i], tr.omega_r[i], cons) -
                                       e0) /
                                  std::abs(e0));
    char buf[120];
    std::snprintf(buf, sizeof buf, "T=%.6f s, max drift=%.3g", period, drift);
    detail = buf;
    return drift < 1e-6;
  });

  run_criterion(8, "identification round trips", 60.0, [&](std::string& detail) {
    bool ok = true;
    {
      const MechIdentResult r0 =
          identify_mechanical(synth_mech(0.0, 0, meas), meas.torque_constant);
      ok = ok && close(r0.Ks, meas.total_stiffness, 0.01 * meas.total_stiffness) &&
           close(r0.J, meas.inertia, 0.01 * meas.inertia) &&
           close(r0.Kd, meas.total_damping, 0.01 * meas.total_damping);
      const MechIdentResult r1 =
          identify_mechanical(synth_mech(0.01, 0, meas), meas.torque_constant);
      ok = ok && close(r1.Ks, meas.total_stiffness, 0.05 * meas.total_stiffness) &&
           close(r1.J, meas.inertia, 0.05 * meas.inertia) &&
           close(r1.Kd, meas.total_damping, 0.05 * meas.total_damping);
    }
    {
      const ElecIdentResult r0 = identify_eddy(synth_elec(0.0, 0, slab), 4, slab);
      ok = ok && close(r0.R, kR, 0.01 * kR) && close(r0.Lc0, kL, 0.01 * kL) &&
           close(r0.musigma_iron, kMsI, 0.01 * kMsI) &&
           close(r0.musigma_magnet, kMsM, 0.01 * kMsM);
      const ElecIdentResult r1 = identify_eddy(synth_elec(0.01, 0, slab), 4, slab);
      ok = ok && close(r1.R, kR, 0.05 * kR) && close(r1.Lc0, kL, 0.05 * kL) &&
           close(r1.musigma_iron, kMsI, 0.05 * kMsI) &&
           close(r1.musigma_magnet, kMsM, 0.05 * kMsM);
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "noisy elec: R=%.4f L=%.4gu mi=%.4f mm=%.4f", r1.R, r1.Lc0 * 1e6,
                    r1.musigma_iron, r1.musigma_magnet);
      detail = buf;
    }
    return ok;
  });

  run_criterion(9, "model-comparison phase ordering at 20 kHz", 60.0,
                [&](std::string& detail) {
    const FrfDataset data = synth_elec(0.0, 0, slab);
    const ElecIdentResult two = identify_rl(data);
    const ElecIdentResult three = identify_eddy(data, 3, slab);
    const ElecIdentResult four = identify_eddy(data, 4, slab);
    const double w = hz_to_rad(20e3);
    const double e2 = phase_error_at(two, data, w);
    const double e3 = phase_error_at(three, data, w);
    const double e4 = phase_error_at(four, data, w);
    char buf[120];
    std::snprintf(buf, sizeof buf, "phase errors: %.3f > %.3f > %.3f deg", e2, e3, e4);
    detail = buf;
    return e2 > e3 && e3 > e4 && e4 < 1.0;
  });

  run_criterion(10, "LuGre steady sliding and loop stiffness", 30.0,
                [&](std::string& detail) {
    const LuGreParams lp = *cfg.lugre;
    bool ok = true;
    for (double factor : {0.1, 1.0, 10.0}) {
      const double v = factor * lp.stribeck_velocity;
      const double g = stribeck(v, lp);
      const double tau = g / (lp.sigma_s * std::abs(v));
      double z = 0.0;
      const double dt = tau / 200.0;
      auto rhs = [&](double, const std::array<double, 1>& x) {
        return std::array<double, 1>{lugre_rhs(v, x[0], lp)};
      };
      const long steps = static_cast<long>(std::ceil(20.0 * tau / dt));
      for (long i = 0; i < steps; ++i) z = rk4_step<1>(rhs, 0.0, {z}, dt)[0];
      ok = ok && std::abs(lugre_force(v, z, lp) - g) <= 1e-3 * g;
    }
    const LumpedElectromech pf = LumpedElectromech::from_config_for_friction(cfg);
    const double ks_total = meas.total_stiffness;
    auto loop_slope = [&](double theta_amp) {
      const double i_amp = ks_total * theta_amp / pf.kt;
      SimOptions opts{1e-4, 0.6, 1, true};
      const Trajectory tr =
          simulate_current(pf, DriveSignal::sine(i_amp, 5.0), DriveSignal::zero(),
                           {pi / 2.0, 0.0, 0.0, 0.0}, opts, &lp);
      std::vector<std::pair<double, double>> series;
      for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr.t[i] >= 0.2) series.emplace_back(tr.beta[i] - pi / 2.0, pf.kt * tr.i_c[i]);
      return loop_stiffness(series).slope;
    };
    const double small = loop_slope(5e-3);
    const double large = loop_slope(0.15);
    char buf[160];
    std::snprintf(buf, sizeof buf, "slope(small)=%.4g vs ks+sigma_s=%.4g, slope(large)=%.4g",
                  small, ks_total, large);
    detail = buf;
    return ok && std::abs(small - ks_total) <= 0.05 * ks_total && large < small;
  });

  run_criterion(11, "half-order high-frequency asymptote", 1.0, [&](std::string& detail) {
    const EddyProducts iron_only{6.4071, 0.0};
    // Sweep to 1e11 rad/s; the top tested decade is [1e10, 1e11].
    const auto grid = orc::log_omega_grid(1e8, 1e11, 121);
    std::vector<double> top_w, top_mag;
    double worst_phase = 0.0;
    for (double w : grid) {
      const cplx h = electrical_admittance(w, ElectricalModelKind::eddy_iron_3dof, kR, kL,
                                           iron_only, slab);
      if (w >= 1e10 * (1.0 - 1e-9)) {
        worst_phase = std::max(worst_phase, std::abs(rad_to_deg(std::arg(h)) + 45.0));
        top_w.push_back(std::log(w));
        top_mag.push_back(std::log(std::abs(h)));
      }
    }
    // Least-squares slope of log|H| vs log(omega) over the top decade.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(top_w.size());
    for (std::size_t i = 0; i < top_w.size(); ++i) {
      sx += top_w[i];
      sy += top_mag[i];
      sxx += top_w[i] * top_w[i];
      sxy += top_w[i] * top_mag[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    char buf[120];
    std::snprintf(buf, sizeof buf, "max |phase+45|=%.3f deg, slope=%.4f", worst_phase,
                  slope);
    detail = buf;
    return worst_phase < 2.0 && std::abs(slope + 0.5) < 0.02;
  });

  std::printf("%s: %d of 11 criteria passed\n", failures == 0 ? "OK" : "FAILED",
              11 - failures);
  return failures == 0 ? 0 : 1;
}
