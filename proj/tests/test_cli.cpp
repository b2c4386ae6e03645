#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "magact/config.hpp"
#include "magact/csv.hpp"
#include "magact/oracle.hpp"

namespace fs = std::filesystem;
using namespace magact;
namespace orc = magact::oracle;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MAGACT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int rc = pclose(pipe);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d =
        fs::temp_directory_path() / ("magact_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::map<std::string, double> parse_report(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = detail::trim(line.substr(0, eq));
    char* end = nullptr;
    const std::string value = detail::trim(line.substr(eq + 1));
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str()) kv[key] = v;
  }
  return kv;
}

std::vector<std::vector<double>> parse_csv(const fs::path& path, std::string* header = nullptr) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

const std::string cfg = q(TABLEI_CFG_PATH);

}  // namespace

TEST_CASE("derive reports the lumped constants") {
  const auto r = run_cli("derive -c " + cfg);
  CHECK(r.code == 0);
  const auto kv = parse_report(r.out);
  CHECK(kv.at("reluctance_total_from_inductance_per_H") == Catch::Approx(3.571e7).epsilon(2e-4));
  CHECK(kv.at("natural_frequency_rad_per_s") == Catch::Approx(887.6).margin(0.5));
  CHECK(kv.at("electrical_time_constant_s") == Catch::Approx(150.5e-6).margin(0.5e-6));
  CHECK(kv.at("dc_mech_gain_rad_per_A") == Catch::Approx(1.466).margin(0.005));
  CHECK(kv.at("magnetic_spring_Nm_per_rad") == Catch::Approx(0.636e-3).epsilon(1e-9));
}

TEST_CASE("derive rejects configs with missing keys by name") {
  const Config base = load_config(TABLEI_CFG_PATH);
  std::string text = write_config(base);
  const auto pos = text.find("turns");
  text.erase(pos, text.find('\n', pos) - pos + 1);
  const fs::path broken = work_dir() / "missing_turns.cfg";
  std::ofstream(broken) << text;

  const auto r = run_cli("derive -c " + q(broken));
  CHECK(r.code == 2);
  CHECK(r.out.find("turns") != std::string::npos);
}

TEST_CASE("derive snapshot round trips to identical derived values") {
  const fs::path snap = work_dir() / "snapshot.cfg";
  const auto first = run_cli("derive -c " + cfg + " --snapshot " + q(snap));
  REQUIRE(first.code == 0);
  const auto second = run_cli("derive -c " + q(snap));
  REQUIRE(second.code == 0);
  CHECK(first.out == second.out);
}

TEST_CASE("freqresp sweeps") {
  SECTION("eddy4 DC row equals 1/R") {
    const fs::path out = work_dir() / "eddy4.csv";
    const auto r = run_cli("freqresp -c " + cfg +
                           " --model eddy4 --fmin 1 --fmax 1e6 --points 50 --include-dc "
                           "--out " + q(out));
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = parse_csv(out, &header);
    CHECK(header == "omega_rad_s,real,imag,mag_db,phase_deg");
    REQUIRE(rows.size() == 51);
    CHECK(rows[0][0] == 0.0);
    CHECK(rows[0][1] == Catch::Approx(1.0 / 1.86).epsilon(1e-12));
    CHECK(rows[0][2] == 0.0);
    CHECK(fs::exists(out.string() + ".manifest"));
  }

  SECTION("mech sweep peaks at the damped resonance") {
    const fs::path out = work_dir() / "mech.csv";
    const auto r = run_cli("freqresp -c " + cfg +
                           " --model mech --fmin 50 --fmax 400 --points 800 --out " + q(out));
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(out);
    double best = -1e30, best_w = 0.0;
    for (const auto& row : rows)
      if (row[3] > best) {
        best = row[3];
        best_w = row[0];
      }
    // omega_n sqrt(1 - 2 zeta^2) with the bundled constants
    CHECK(best_w == Catch::Approx(866.5).epsilon(0.01));
  }

  SECTION("eddy3 approaches the half-order phase at the top of the sweep") {
    const fs::path out = work_dir() / "eddy3.csv";
    const auto r = run_cli("freqresp -c " + cfg +
                           " --model eddy3 --fmin 1.6e9 --fmax 1.6e10 --points 40 --out " +
                           q(out));
    REQUIRE(r.code == 0);
    for (const auto& row : parse_csv(out))
      CHECK(row[4] == Catch::Approx(-45.0).margin(2.0));
  }

  SECTION("unknown model names are usage errors") {
    const auto r = run_cli("freqresp -c " + cfg + " --model warp --out " +
                           q(work_dir() / "x.csv"));
    CHECK(r.code == 2);
    CHECK(r.out.find("warp") != std::string::npos);
  }
}

TEST_CASE("simulate") {
  SECTION("zero drive from the stable point stays constant") {
    const fs::path out = work_dir() / "still.csv";
    const auto r = run_cli("simulate -c " + cfg +
                           " --drive zero --t-end 0.01 --out " + q(out));
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(out);
    REQUIRE(rows.size() > 100);
    for (const auto& row : rows) {
      CHECK(std::abs(row[1] - pi / 2.0) < 1e-12);
      CHECK(std::abs(row[2]) < 1e-12);
      CHECK(std::abs(row[3]) < 1e-12);
    }
  }

  SECTION("open-coil undamped run conserves the mechanical energy") {
    const fs::path out = work_dir() / "energy.csv";
    const auto r = run_cli("simulate -c " + cfg +
                           " --open-coil --no-damping --beta0 1.8707963267948966"
                           " --dt 1e-5 --t-end 0.1 --out " + q(out));
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(out);
    const double j = 1.65e-9, krest = 0.318e-3;
    auto energy = [&](const std::vector<double>& row) {
      return 0.5 * j * row[2] * row[2] + 0.5 * krest * std::cos(2.0 * row[1]);
    };
    const double e0 = energy(rows.front());
    for (const auto& row : rows)
      CHECK(std::abs(energy(row) - e0) < 1e-6 * std::abs(e0));
  }

  SECTION("current-driven friction run produces pre-sliding loops") {
    const fs::path traj = work_dir() / "lugre.csv";
    const fs::path loop = work_dir() / "loop.csv";
    // kt i = Ks theta with theta about 5 mrad
    const auto r = run_cli("simulate -c " + cfg +
                           " --drive-kind current --lugre --drive sine:3.41e-3,5"
                           " --dt 1e-4 --t-end 0.6 --out " + q(traj) +
                           " --loop-out " + q(loop));
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = parse_csv(loop, &header);
    CHECK(header == "t_s,theta_rad,torque_Nm");
    std::vector<std::pair<double, double>> series;
    for (const auto& row : rows)
      if (row[0] >= 0.2) series.emplace_back(row[1], row[2]);
    const HysteresisLoop fit = loop_stiffness(series);
    CHECK(fit.slope == Catch::Approx(1.3e-3).epsilon(0.05));
    CHECK(fit.band_width > 0.0);
    // Trajectory carries the bristle state as a fourth column.
    std::string traj_header;
    parse_csv(traj, &traj_header);
    CHECK(traj_header == "t_s,beta_rad,omega_rad_s,i_c_A,z_rad");
  }

  SECTION("stiffness guard refuses oversized steps unless forced") {
    const fs::path out = work_dir() / "guard.csv";
    const auto refuse = run_cli("simulate -c " + cfg +
                                " --drive zero --dt 5e-5 --t-end 0.01 --out " + q(out));
    CHECK(refuse.code == 2);
    CHECK(refuse.out.find("stiffness guard") != std::string::npos);
    const auto forced = run_cli("simulate -c " + cfg +
                                " --drive zero --dt 5e-5 --t-end 0.01 --force --out " +
                                q(out));
    CHECK(forced.code == 0);
  }
}

TEST_CASE("identify") {
  const Config table = load_config(TABLEI_CFG_PATH);
  const MeasuredConstants& m = *table.measured;

  SECTION("mechanical round trip through CSV files") {
    const auto grid = orc::log_omega_grid(hz_to_rad(1.0), hz_to_rad(20e3), 250);
    const auto samples = orc::synth_frf(
        [&](double w) {
          return m.torque_constant /
                 cplx(m.total_stiffness - m.inertia * w * w, m.total_damping * w);
        },
        grid, 0.0, 0);
    const fs::path frf = work_dir() / "mech_frf.csv";
    {
      std::ofstream out(frf);
      write_frf_csv(out, FrfDataset::from_pairs(FrfKind::mechanical, samples));
    }
    const fs::path resid = work_dir() / "mech_resid.csv";
    const auto r = run_cli("identify -c " + cfg + " --kind mech --frf " + q(frf) +
                           " --residuals " + q(resid));
    REQUIRE(r.code == 0);
    const auto kv = parse_report(r.out);
    CHECK(kv.at("total_stiffness_Nm_per_rad") == Catch::Approx(m.total_stiffness).epsilon(0.01));
    CHECK(kv.at("inertia_kgm2") == Catch::Approx(m.inertia).epsilon(0.01));
    CHECK(kv.at("total_damping_Nms_per_rad") == Catch::Approx(m.total_damping).epsilon(0.01));
    CHECK(fs::exists(resid));
    CHECK(fs::exists(resid.string() + ".manifest"));
  }

  SECTION("malformed FRF rows are input errors with the row number") {
    const fs::path frf = work_dir() / "broken.csv";
    std::ofstream(frf) << "freq_hz,real,imag\n1,0.5,0\n2,0.5,0\n3,0.5,zero\n";
    const auto r = run_cli("identify -c " + cfg + " --kind elec --dof 2 --frf " + q(frf));
    CHECK(r.code == 2);
    CHECK(r.out.find("row 4") != std::string::npos);
  }

  SECTION("fit failures are numerical errors with the named code") {
    // A band that starts at resonance has no low-frequency plateau.
    const auto grid = orc::log_omega_grid(800.0, hz_to_rad(20e3), 64);
    const auto samples = orc::synth_frf(
        [&](double w) {
          return m.torque_constant /
                 cplx(m.total_stiffness - m.inertia * w * w, m.total_damping * w);
        },
        grid, 0.0, 0);
    const fs::path frf = work_dir() / "no_plateau.csv";
    {
      std::ofstream out(frf);
      write_frf_csv(out, FrfDataset::from_pairs(FrfKind::mechanical, samples));
    }
    const auto r = run_cli("identify -c " + cfg + " --kind mech --frf " + q(frf));
    CHECK(r.code == 1);
    CHECK(r.out.find("NO_PLATEAU") != std::string::npos);
  }
}

TEST_CASE("compare ranks the electrical models") {
  const SlabGeometry slab = SlabGeometry::from_config(load_config(TABLEI_CFG_PATH).actuator);
  const auto grid = orc::log_omega_grid(hz_to_rad(1.0), hz_to_rad(1e6), 400);
  const auto samples = orc::synth_frf(
      [&](double w) {
        return electrical_admittance(w, ElectricalModelKind::eddy_iron_magnet_4dof, 1.86,
                                     295e-6, {3.2035, 2.8227}, slab);
      },
      grid, 0.0, 0);
  const fs::path frf = work_dir() / "elec_frf.csv";
  {
    std::ofstream out(frf);
    write_frf_csv(out, FrfDataset::from_pairs(FrfKind::electrical, samples));
  }
  const auto r = run_cli("compare -c " + cfg + " --frf " + q(frf));
  REQUIRE(r.code == 0);

  std::map<std::string, double> phase_err;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("rl,", 0) == 0 || line.rfind("eddy3,", 0) == 0 ||
        line.rfind("eddy4,", 0) == 0) {
      std::istringstream ss(line);
      std::string name, dof, resid, phase;
      std::getline(ss, name, ',');
      std::getline(ss, dof, ',');
      std::getline(ss, resid, ',');
      std::getline(ss, phase, ',');
      phase_err[name] = std::strtod(phase.c_str(), nullptr);
    }
  }
  REQUIRE(phase_err.size() == 3);
  CHECK(phase_err.at("rl") > phase_err.at("eddy3"));
  CHECK(phase_err.at("eddy3") > phase_err.at("eddy4"));
  CHECK(phase_err.at("eddy4") < 1.0);
  CHECK(r.out.find("reference (hardware measurement") != std::string::npos);
}

TEST_CASE("fields maps") {
  SECTION("lamination at DC is uniform and current free") {
    const fs::path out = work_dir() / "lam_dc.csv";
    const auto r = run_cli("fields -c " + cfg +
                           " --domain lam --freq-hz 0 --grid 21 --out " + q(out));
    REQUIRE(r.code == 0);
    for (const auto& row : parse_csv(out)) {
      CHECK(row[2] == Catch::Approx(1.0).epsilon(1e-12));
      CHECK(row[3] == 0.0);
      CHECK(row[4] == 0.0);
      CHECK(row[5] == 0.0);
    }
  }

  SECTION("magnet map vanishes at the center and holds the boundary") {
    const fs::path out = work_dir() / "magnet.csv";
    const auto r = run_cli("fields -c " + cfg +
                           " --domain magnet --freq-hz 1000 --grid 21 --out " + q(out));
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(out);
    REQUIRE(rows.size() == 21 * 21);
    bool saw_center = false;
    for (const auto& row : rows) {
      if (row[0] == 0.0 && row[1] == 0.0) {
        saw_center = true;
        CHECK(row[4] == 0.0);
        CHECK(row[5] == 0.0);
        CHECK(row[6] == 0.0);
        CHECK(row[7] == 0.0);
      }
      if (std::abs(std::abs(row[0]) - 2.36e-3) < 1e-9 && row[1] == 0.0) {
        CHECK(std::abs(cplx(row[2], row[3]) - cplx(1.0, 0.0)) < 0.02);
      }
    }
    CHECK(saw_center);
  }

  SECTION("unknown domains are usage errors") {
    const auto r = run_cli("fields -c " + cfg + " --domain rotor --out " +
                           q(work_dir() / "x.csv"));
    CHECK(r.code == 2);
  }
}
