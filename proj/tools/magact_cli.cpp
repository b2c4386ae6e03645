// Command-line front end: parameter derivation, frequency sweeps, time-domain
// simulation, identification, model comparison, and field maps. Exit codes:
// 0 success, 1 numerical failure (named), 2 input or usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "magact/csv.hpp"
#include "magact/dynamics.hpp"
#include "magact/eddy.hpp"
#include "magact/identify.hpp"
#include "magact/magnetics.hpp"
#include "magact/oracle.hpp"
#include "magact/version.hpp"

namespace {

using namespace magact;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

/// Reproducibility record written next to every output file.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> io;  // role -> path
  const Config* config = nullptr;

  void write_for(const std::string& output_path) const {
    std::ofstream out(output_path + ".manifest");
    out << "command = " << command << '\n';
    out << "tool_version = " << version << '\n';
    out << "config_path = " << config_path << '\n';
    for (const auto& [role, path] : io) out << role << " = " << path << '\n';
    if (config) {
      out << "# resolved parameter snapshot\n";
      std::istringstream snap(write_config(*config));
      std::string line;
      while (std::getline(snap, line)) out << "cfg." << line << '\n';
    }
  }
};

DriveSignal parse_drive(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::istringstream ss(spec.substr(colon + 1));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::invalid_argument("bad drive argument '" + cell + "' in '" + spec + "'");
      args.push_back(v);
    }
  }
  if (head == "zero" && args.empty()) return DriveSignal::zero();
  if (head == "step" && args.size() == 1) return DriveSignal::step(args[0]);
  if (head == "sine" && (args.size() == 2 || args.size() == 3))
    return DriveSignal::sine(args[0], args[1], args.size() == 3 ? args[2] : 0.0);
  if (head == "chirp" && args.size() == 4)
    return DriveSignal::chirp(args[0], args[1], args[2], args[3]);
  throw std::invalid_argument(
      "bad drive spec '" + spec +
      "' (use zero | step:A | sine:A,F_HZ[,PHASE_RAD] | chirp:A,F0_HZ,F1_HZ,T_S)");
}

std::vector<std::pair<std::string, std::string>> derive_report(const Config& cfg) {
  const ActuatorConfig& a = cfg.actuator;
  const FluxPath path = derive_flux_path(a);
  const ReluctanceSet rel = reluctance_set(path, a.iron_rel_permeability,
                                           a.low_freq_inductance, a.turns);
  const MagnetModel magnet = MagnetModel::from_config(a);
  const MeasuredConstants& mc = cfg.require_measured();
  const TorqueBackemfModel tb =
      TorqueBackemfModel::from_measured(mc.torque_constant, mc.restoration_peak());
  const StatorFieldSpectrum spectrum = StatorFieldSpectrum::from_torque_constant(
      mc.torque_constant, a.stack_length, a.rotor_radius, magnet.magnetization);
  const LumpedElectromech p = LumpedElectromech::from_config(cfg);
  const auto [omega_n, zeta] = natural_freq_damping(p);

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("magnet_length_m", fmt(path.magnet_length));
  kv.emplace_back("airgap_length_m", fmt(path.airgap_length));
  kv.emplace_back("iron_length_m", fmt(path.iron_length));
  kv.emplace_back("pole_area_m2", fmt(path.pole_area));
  kv.emplace_back("reluctance_gap_per_H", fmt(rel.gap));
  kv.emplace_back("reluctance_magnet_per_H", fmt(rel.magnet));
  kv.emplace_back("reluctance_iron_per_H", fmt(rel.iron));
  kv.emplace_back("reluctance_total_per_H", fmt(rel.total));
  kv.emplace_back("reluctance_total_from_inductance_per_H", fmt(rel.total_from_inductance));
  kv.emplace_back("mu_eff_iron_H_per_m", fmt(rel.mu_eff_iron));
  kv.emplace_back("mu_eff_magnet_H_per_m", fmt(rel.mu_eff_magnet));
  kv.emplace_back("magnetization_A_per_m", fmt(magnet.magnetization));
  kv.emplace_back("pm_mmf_A", fmt(pm_mmf(magnet)));
  kv.emplace_back("stator_fundamental_T_per_A",
                  fmt(a.stator_fundamental.value_or(spectrum.fundamental())));
  kv.emplace_back("torque_constant_Nm_per_A", fmt(tb.kt));
  kv.emplace_back("restoration_peak_Nm", fmt(tb.restoration_peak));
  kv.emplace_back("magnetic_spring_Nm_per_rad", fmt(tb.magnetic_spring));
  kv.emplace_back("backemf_constant_Vs_per_rad", fmt(tb.kb));
  kv.emplace_back("flux_peak_Wb", fmt(tb.flux_peak));
  kv.emplace_back("natural_frequency_rad_per_s", fmt(omega_n));
  kv.emplace_back("damping_ratio", fmt(zeta));
  kv.emplace_back("electrical_time_constant_s", fmt(p.electrical_time_constant()));
  kv.emplace_back("dc_mech_gain_rad_per_A", fmt(p.kt / p.Ks));
  return kv;
}

int cmd_derive(const std::string& config_path, const std::string& out_path,
               const std::string& snapshot_path) {
  const Config cfg = load_config(config_path);
  const auto kv = derive_report(cfg);
  write_keyvalue(std::cout, kv);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
    write_keyvalue(out, kv);
    RunManifest m{"derive", config_path, {{"output.report", out_path}}, &cfg};
    m.write_for(out_path);
  }
  if (!snapshot_path.empty()) {
    std::ofstream snap(snapshot_path);
    if (!snap) throw std::invalid_argument("cannot open snapshot '" + snapshot_path + "'");
    snap << write_config(cfg);
  }
  return 0;
}

int cmd_freqresp(const std::string& config_path, const std::string& model, double fmin,
                 double fmax, int points, bool include_dc, bool bare_coil,
                 const std::string& out_path) {
  const Config cfg = load_config(config_path);
  if (!(fmin > 0 && fmax > fmin)) throw std::invalid_argument("need 0 < fmin < fmax");
  if (points < 2) throw std::invalid_argument("need at least 2 points");

  std::function<cplx(double)> eval;
  if (model == "mech") {
    const TransferFunction tf = mech_tf(LumpedElectromech::from_config(cfg));
    eval = [tf](double w) { return tf.at_omega(w); };
  } else if (model == "elec-full") {
    const TransferFunction tf = elec_tf_full(LumpedElectromech::from_config(cfg));
    eval = [tf](double w) { return tf.at_omega(w); };
  } else {
    const double r = bare_coil ? cfg.actuator.coil_resistance
                               : cfg.actuator.series_resistance();
    const double l = cfg.actuator.low_freq_inductance;
    if (model == "rl") {
      eval = [r, l](double w) { return 1.0 / cplx(r, w * l); };
    } else if (model == "eddy3" || model == "eddy4") {
      const SlabGeometry slab = SlabGeometry::from_config(cfg.actuator);
      const EddyProducts ep = cfg.require_eddy();
      const ElectricalModelKind kind = model == "eddy3"
                                           ? ElectricalModelKind::eddy_iron_3dof
                                           : ElectricalModelKind::eddy_iron_magnet_4dof;
      eval = [r, l, ep, slab, kind](double w) {
        return electrical_admittance(w, kind, r, l, ep, slab);
      };
    } else {
      throw std::invalid_argument("unknown model '" + model +
                                  "' (rl|eddy3|eddy4|mech|elec-full)");
    }
  }

  std::vector<ComplexResponse> sweep;
  if (include_dc) sweep.push_back({0.0, eval(0.0)});
  for (double w : oracle::log_omega_grid(hz_to_rad(fmin), hz_to_rad(fmax), points))
    sweep.push_back({w, eval(w)});

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
  write_sweep_csv(out, sweep);
  RunManifest m{"freqresp", config_path, {{"output.csv", out_path}, {"model", model}}, &cfg};
  m.write_for(out_path);
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& drive_spec,
                 const std::string& load_spec, const std::string& drive_kind, double dt,
                 double t_end, int decimation, double beta0, bool degrees, bool lugre,
                 bool no_damping, bool open_coil, bool force, const std::string& out_path,
                 const std::string& loop_path) {
  const Config cfg = load_config(config_path);
  LumpedElectromech p = lugre ? LumpedElectromech::from_config_for_friction(cfg)
                              : LumpedElectromech::from_config(cfg);
  if (no_damping) p.Kd = 0.0;
  const LuGreParams* lp = lugre ? &cfg.require_lugre() : nullptr;

  StateVector x0;
  x0.beta = degrees ? deg_to_rad(beta0) : beta0;
  if (lugre) x0.z = 0.0;

  const DriveSignal drive = parse_drive(drive_spec);
  const DriveSignal load = parse_drive(load_spec);

  SimOptions opts;
  const auto [omega_n, zeta] = natural_freq_damping(p);
  (void)zeta;
  const double guard = std::min(p.electrical_time_constant(), 1.0 / omega_n) / 5.0;
  opts.dt = dt > 0 ? dt : guard / 2.0;
  opts.t_end = t_end;
  opts.decimation = decimation;
  opts.enforce_stiffness_guard = !force;

  Trajectory tr;
  if (open_coil || drive_kind == "current") {
    const DriveSignal current = open_coil ? DriveSignal::zero() : drive;
    tr = simulate_current(p, current, load, x0, opts, lp);
  } else {
    tr = simulate_voltage(p, drive, load, x0, opts, lp);
  }

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
  write_trajectory_csv(out, tr);
  RunManifest m{"simulate", config_path, {{"output.csv", out_path}, {"drive", drive_spec}},
                &cfg};
  m.write_for(out_path);

  if (!loop_path.empty()) {
    // Torque-position samples of the drive torque, for loop-stiffness fits.
    std::vector<std::array<double, 3>> rows;
    rows.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i)
      rows.push_back({tr.t[i], tr.beta[i] - 0.5 * pi, p.kt * tr.i_c[i]});
    std::ofstream loop(loop_path);
    if (!loop) throw std::invalid_argument("cannot open output '" + loop_path + "'");
    write_loop_csv(loop, rows);
    m.io = {{"output.loop", loop_path}};
    m.write_for(loop_path);
  }
  return 0;
}

void write_residuals_csv(const std::string& path, const FrfDataset& data,
                         const std::function<cplx(double)>& model) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output '" + path + "'");
  out << "omega_rad_s,data_real,data_imag,model_real,model_imag,rel_error\n";
  for (const auto& pt : data.points) {
    const cplx h = model(pt.omega);
    out << fmt(pt.omega) << ',' << fmt(pt.value.real()) << ',' << fmt(pt.value.imag())
        << ',' << fmt(h.real()) << ',' << fmt(h.imag()) << ','
        << fmt(std::abs(h - pt.value) / std::abs(pt.value)) << '\n';
  }
}

int cmd_identify(const std::string& config_path, const std::string& kind, int dof,
                 const std::string& frf_path, const std::string& out_path,
                 const std::string& residual_path) {
  const Config cfg = load_config(config_path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::function<cplx(double)> model;
  FrfDataset data;

  if (kind == "mech") {
    data = read_frf_csv_file(frf_path, FrfKind::mechanical);
    const double kt = cfg.require_measured().torque_constant;
    const MechIdentResult r = identify_mechanical(data, kt);
    kv = {{"kind", "mech"},
          {"total_stiffness_Nm_per_rad", fmt(r.Ks)},
          {"inertia_kgm2", fmt(r.J)},
          {"natural_frequency_rad_per_s", fmt(r.omega_n)},
          {"damping_ratio", fmt(r.zeta)},
          {"total_damping_Nms_per_rad", fmt(r.Kd)},
          {"fit_residual", fmt(r.fit_residual)}};
    model = [r, kt](double w) { return kt / cplx(r.Ks - r.J * w * w, r.Kd * w); };
  } else if (kind == "elec") {
    data = read_frf_csv_file(frf_path, FrfKind::electrical);
    ElecIdentResult r;
    if (dof == 2) {
      r = identify_rl(data);
    } else {
      r = identify_eddy(data, dof, SlabGeometry::from_config(cfg.actuator));
    }
    kv = {{"kind", "elec"},
          {"dof", std::to_string(r.dof)},
          {"resistance_ohm", fmt(r.R)},
          {"low_freq_inductance_H", fmt(r.Lc0)},
          {"musigma_iron_s_per_m2", fmt(r.musigma_iron)},
          {"musigma_magnet_s_per_m2", fmt(r.musigma_magnet)},
          {"fit_residual", fmt(r.fit_residual)},
          {"residual_definition", "relative_complex_rms"}};
    for (const auto& w : r.warnings) kv.emplace_back("warning", w);
    model = [r](double w) { return r.model_at(w); };
  } else {
    throw std::invalid_argument("unknown identification kind '" + kind + "' (mech|elec)");
  }

  write_keyvalue(std::cout, kv);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
    write_keyvalue(out, kv);
    RunManifest m{"identify", config_path,
                  {{"input.frf", frf_path}, {"output.report", out_path}}, &cfg};
    m.write_for(out_path);
  }
  if (!residual_path.empty()) {
    write_residuals_csv(residual_path, data, model);
    RunManifest m{"identify", config_path,
                  {{"input.frf", frf_path}, {"output.residuals", residual_path}}, &cfg};
    m.write_for(residual_path);
  }
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& frf_path,
                double at_freq_hz, const std::string& out_path) {
  const Config cfg = load_config(config_path);
  const FrfDataset data = read_frf_csv_file(frf_path, FrfKind::electrical);
  const SlabGeometry slab = SlabGeometry::from_config(cfg.actuator);
  const double omega = hz_to_rad(at_freq_hz);

  std::vector<ElecIdentResult> fits;
  fits.push_back(identify_rl(data));
  fits.push_back(identify_eddy(data, 3, slab));
  fits.push_back(identify_eddy(data, 4, slab));

  std::ostringstream table;
  table << "model,dof,fit_residual,phase_error_deg_at_" << fmt(at_freq_hz) << "_hz\n";
  for (const auto& r : fits) {
    const char* name = r.dof == 2 ? "rl" : (r.dof == 3 ? "eddy3" : "eddy4");
    table << name << ',' << r.dof << ',' << fmt(r.fit_residual) << ','
          << fmt(phase_error_at(r, data, omega)) << '\n';
  }
  table << "# reference (hardware measurement, 20 kHz): 15 deg (2-DoF), "
           "9 deg (3-DoF), 0.4 deg (4-DoF)\n";
  std::cout << table.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
    out << table.str();
    RunManifest m{"compare", config_path,
                  {{"input.frf", frf_path}, {"output.table", out_path}}, &cfg};
    m.write_for(out_path);
  }
  return 0;
}

int cmd_fields(const std::string& config_path, const std::string& domain, double freq_hz,
               int grid, const std::string& out_path) {
  const Config cfg = load_config(config_path);
  if (grid < 3) throw std::invalid_argument("grid must be >= 3");
  if (freq_hz < 0) throw std::invalid_argument("freq-hz must be >= 0");
  const double omega = hz_to_rad(freq_hz);
  const ActuatorConfig& a = cfg.actuator;
  const EddyProducts ep = cfg.require_eddy();
  const FluxPath path = derive_flux_path(a);
  const ReluctanceSet rel =
      reluctance_set(path, a.iron_rel_permeability, a.low_freq_inductance, a.turns);

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");

  if (domain == "lam") {
    const double half = 0.5 * a.lamination_thickness;
    out << "x_m,z_m,b_real,b_imag,j_real,j_imag\n";
    for (int i = 0; i < grid; ++i) {
      const double z = -half + 2.0 * half * i / (grid - 1);
      const cplx b = lamination_field(z, omega, ep.musigma_iron, a.lamination_thickness);
      const cplx j = lamination_current_density(z, omega, 1.0, ep.musigma_iron,
                                                rel.mu_eff_iron, a.lamination_thickness);
      out << fmt(0.0) << ',' << fmt(z) << ',' << fmt(b.real()) << ',' << fmt(b.imag())
          << ',' << fmt(j.real()) << ',' << fmt(j.imag()) << '\n';
    }
  } else if (domain == "magnet") {
    const SlabGeometry slab = SlabGeometry::from_config(a);
    const double aw = slab.magnet_half_width, bl = slab.magnet_half_length;
    out << "x_m,z_m,b_real,b_imag,jx_real,jx_imag,jz_real,jz_imag\n";
    for (int jz = 0; jz < grid; ++jz)
      for (int ix = 0; ix < grid; ++ix) {
        const double x = -aw + 2.0 * aw * ix / (grid - 1);
        const double z = -bl + 2.0 * bl * jz / (grid - 1);
        const cplx b = magnet_field_2d(x, z, omega, ep.musigma_magnet, aw, bl);
        const auto [jx, jzc] = magnet_current_density(x, z, omega, ep.musigma_magnet,
                                                      rel.mu_eff_magnet, aw, bl);
        out << fmt(x) << ',' << fmt(z) << ',' << fmt(b.real()) << ',' << fmt(b.imag())
            << ',' << fmt(jx.real()) << ',' << fmt(jx.imag()) << ',' << fmt(jzc.real())
            << ',' << fmt(jzc.imag()) << '\n';
      }
  } else {
    throw std::invalid_argument("unknown domain '" + domain + "' (lam|magnet)");
  }
  RunManifest m{"fields", config_path, {{"output.csv", out_path}, {"domain", domain}},
                &cfg};
  m.write_for(out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limited-rotation actuator modeling and identification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(magact::version));

  std::string config_path, out_path, snapshot_path, model = "eddy4";
  std::string drive_spec = "zero", load_spec = "zero", drive_kind = "voltage";
  std::string kind = "elec", frf_path, residual_path, domain = "lam", loop_path;
  double fmin = 1.0, fmax = 1e6, at_freq_hz = 20000.0, freq_hz = 0.0;
  double dt = 0.0, t_end = 0.05, beta0 = magact::pi / 2.0;
  int points = 200, dof = 4, decimation = 1, grid = 41;
  bool include_dc = false, bare_coil = false, degrees = false, lugre = false;
  bool no_damping = false, open_coil = false, force = false;

  auto* derive = app.add_subcommand("derive", "Derived lumped parameters from a config");
  derive->add_option("-c,--config", config_path)->required();
  derive->add_option("--out", out_path);
  derive->add_option("--snapshot", snapshot_path);

  auto* freqresp = app.add_subcommand("freqresp", "Frequency-response sweep to CSV");
  freqresp->add_option("-c,--config", config_path)->required();
  freqresp->add_option("--model", model, "rl|eddy3|eddy4|mech|elec-full");
  freqresp->add_option("--fmin", fmin, "start frequency [Hz]");
  freqresp->add_option("--fmax", fmax, "end frequency [Hz]");
  freqresp->add_option("--points", points);
  freqresp->add_flag("--include-dc", include_dc, "prepend an exact DC row");
  freqresp->add_flag("--bare-coil", bare_coil, "use Rc alone instead of Rc + Rs");
  freqresp->add_option("--out", out_path)->required();

  auto* simulate = app.add_subcommand("simulate", "Fixed-step time-domain simulation");
  simulate->add_option("-c,--config", config_path)->required();
  simulate->add_option("--drive", drive_spec, "zero|step:A|sine:A,F[,PH]|chirp:A,F0,F1,T");
  simulate->add_option("--load", load_spec, "load torque drive spec");
  simulate->add_option("--drive-kind", drive_kind, "voltage|current");
  simulate->add_option("--dt", dt, "step [s]; default from the stiffness guard");
  simulate->add_option("--t-end", t_end);
  simulate->add_option("--decimation", decimation);
  simulate->add_option("--beta0", beta0, "initial rotor angle");
  simulate->add_flag("--degrees", degrees, "beta0 given in degrees");
  simulate->add_flag("--lugre", lugre, "append the friction state");
  simulate->add_flag("--no-damping", no_damping);
  simulate->add_flag("--open-coil", open_coil, "force zero coil current");
  simulate->add_flag("--force", force, "override the stiffness guard");
  simulate->add_option("--out", out_path)->required();
  simulate->add_option("--loop-out", loop_path, "also write t,theta,torque samples");

  auto* identify = app.add_subcommand("identify", "Fit model parameters to an FRF");
  identify->add_option("-c,--config", config_path)->required();
  identify->add_option("--kind", kind, "mech|elec");
  identify->add_option("--dof", dof, "electrical model order: 2|3|4");
  identify->add_option("--frf", frf_path)->required();
  identify->add_option("--out", out_path);
  identify->add_option("--residuals", residual_path);

  auto* compare = app.add_subcommand("compare", "Fit 2/3/4-DoF models and report errors");
  compare->add_option("-c,--config", config_path)->required();
  compare->add_option("--frf", frf_path)->required();
  compare->add_option("--at-freq-hz", at_freq_hz);
  compare->add_option("--out", out_path);

  auto* fields = app.add_subcommand("fields", "Field and current-density maps to CSV");
  fields->add_option("-c,--config", config_path)->required();
  fields->add_option("--domain", domain, "lam|magnet");
  fields->add_option("--freq-hz", freq_hz);
  fields->add_option("--grid", grid);
  fields->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
    if (derive->parsed()) return cmd_derive(config_path, out_path, snapshot_path);
    if (freqresp->parsed())
      return cmd_freqresp(config_path, model, fmin, fmax, points, include_dc, bare_coil,
                          out_path);
    if (simulate->parsed())
      return cmd_simulate(config_path, drive_spec, load_spec, drive_kind, dt, t_end,
                          decimation, beta0, degrees, lugre, no_damping, open_coil, force,
                          out_path, loop_path);
    if (identify->parsed())
      return cmd_identify(config_path, kind, dof, frf_path, out_path, residual_path);
    if (compare->parsed()) return cmd_compare(config_path, frf_path, at_freq_hz, out_path);
    if (fields->parsed()) return cmd_fields(config_path, domain, freq_hz, grid, out_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const magact::identify_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const magact::simulate_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const magact::oracle::oracle_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const magact::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const magact::csv_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
