#pragma once

// Fixed-schema CSV readers and writers shared by the CLI and the tests.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magact/constants.hpp"
#include "magact/dynamics.hpp"
#include "magact/identify.hpp"

namespace magact {

struct csv_error : std::runtime_error {
  int row = 0;  // 1-based, header included
  csv_error(const std::string& msg, int row_ = 0)
      : std::runtime_error(row_ > 0 ? msg + " (row " + std::to_string(row_) + ")" : msg),
        row(row_) {}
};

namespace detail {

inline std::string num15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

inline double cell_to_double(const std::string& cell, int row) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw csv_error("malformed numeric cell '" + cell + "'", row);
  return v;
}

}  // namespace detail

/// Frequency-sweep emitter: omega_rad_s,real,imag,mag_db,phase_deg.
inline void write_sweep_csv(std::ostream& out, const std::vector<ComplexResponse>& sweep) {
  out << "omega_rad_s,real,imag,mag_db,phase_deg\n";
  for (const auto& p : sweep) {
    const double mag = std::abs(p.value);
    out << detail::num15(p.omega) << ',' << detail::num15(p.value.real()) << ','
        << detail::num15(p.value.imag()) << ','
        << detail::num15(20.0 * std::log10(mag)) << ','
        << detail::num15(rad_to_deg(std::arg(p.value))) << '\n';
  }
}

/// FRF ingestion, auto-detected header: either freq_hz,real,imag or
/// freq_hz,mag_db,phase_deg.
inline FrfDataset read_frf_csv(std::istream& in, FrfKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw csv_error("empty FRF file", 1);
  const auto header = detail::split_csv_row(line);
  bool polar = false;
  if (header == std::vector<std::string>{"freq_hz", "real", "imag"}) {
    polar = false;
  } else if (header == std::vector<std::string>{"freq_hz", "mag_db", "phase_deg"}) {
    polar = true;
  } else {
    throw csv_error("unrecognized FRF header '" + line + "'", 1);
  }
  FrfDataset d;
  d.kind = kind;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_row(line);
    if (cells.size() != 3) throw csv_error("expected 3 columns", row);
    const double f = detail::cell_to_double(cells[0], row);
    cplx h;
    if (polar) {
      const double mag = std::pow(10.0, detail::cell_to_double(cells[1], row) / 20.0);
      const double ph = deg_to_rad(detail::cell_to_double(cells[2], row));
      h = std::polar(mag, ph);
    } else {
      h = cplx(detail::cell_to_double(cells[1], row),
               detail::cell_to_double(cells[2], row));
    }
    d.points.push_back({hz_to_rad(f), h});
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw csv_error(e.what());
  }
  return d;
}

inline FrfDataset read_frf_csv_file(const std::string& path, FrfKind kind) {
  std::ifstream in(path);
  if (!in) throw csv_error("cannot open FRF file '" + path + "'");
  return read_frf_csv(in, kind);
}

/// FRF emitter in the rectangular ingestion schema.
inline void write_frf_csv(std::ostream& out, const FrfDataset& d) {
  out << "freq_hz,real,imag\n";
  for (const auto& p : d.points)
    out << detail::num15(rad_to_hz(p.omega)) << ',' << detail::num15(p.value.real())
        << ',' << detail::num15(p.value.imag()) << '\n';
}

/// Trajectory emitter: t_s,beta_rad,omega_rad_s,i_c_A[,z_rad].
inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "t_s,beta_rad,omega_rad_s,i_c_A";
  if (tr.has_z) out << ",z_rad";
  out << '\n';
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out << detail::num15(tr.t[i]) << ',' << detail::num15(tr.beta[i]) << ','
        << detail::num15(tr.omega_r[i]) << ',' << detail::num15(tr.i_c[i]);
    if (tr.has_z) out << ',' << detail::num15(tr.z[i]);
    out << '\n';
  }
}

/// Hysteresis-loop emitter/ingester: t_s,theta_rad,torque_Nm.
inline void write_loop_csv(std::ostream& out,
                           const std::vector<std::array<double, 3>>& rows) {
  out << "t_s,theta_rad,torque_Nm\n";
  for (const auto& r : rows)
    out << detail::num15(r[0]) << ',' << detail::num15(r[1]) << ','
        << detail::num15(r[2]) << '\n';
}

inline std::vector<std::pair<double, double>> read_loop_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw csv_error("empty loop file", 1);
  if (detail::split_csv_row(line) !=
      std::vector<std::string>{"t_s", "theta_rad", "torque_Nm"})
    throw csv_error("unrecognized loop header '" + line + "'", 1);
  std::vector<std::pair<double, double>> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_row(line);
    if (cells.size() != 3) throw csv_error("expected 3 columns", row);
    out.emplace_back(detail::cell_to_double(cells[1], row),
                     detail::cell_to_double(cells[2], row));
  }
  return out;
}

/// Flat key = value report block, mirroring the config format.
inline void write_keyvalue(std::ostream& out,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

/// Complex field-map emitter: x_m,z_m,real,imag one row per sample.
inline void write_fieldmap_csv(std::ostream& out,
                               const std::vector<std::array<double, 4>>& rows) {
  out << "x_m,z_m,real,imag\n";
  for (const auto& r : rows)
    out << detail::num15(r[0]) << ',' << detail::num15(r[1]) << ','
        << detail::num15(r[2]) << ',' << detail::num15(r[3]) << '\n';
}

}  // namespace magact
