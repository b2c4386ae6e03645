#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "magact/config.hpp"

using namespace magact;

namespace {

Config table1() { return load_config(TABLEI_CFG_PATH); }

std::string table1_text() { return write_config(table1()); }

}  // namespace

TEST_CASE("bundled config loads with the expected constants") {
  const Config cfg = table1();
  const ActuatorConfig& a = cfg.actuator;
  CHECK(a.outer_diameter == 13.716e-3);
  CHECK(a.lamination_thickness == 0.35e-3);
  CHECK(a.lamination_count == 12);
  CHECK(a.stack_length == 4.191e-3);
  CHECK(a.pole_width == 4.72e-3);
  CHECK(a.rotor_radius == 1.524e-3);
  CHECK(a.minor_radius == 1.71e-3);
  CHECK(a.major_radius == 1.9665e-3);
  CHECK(a.turns == 100);
  CHECK(a.pm_remanence == 1.37);
  CHECK(a.coil_resistance == 1.76);
  CHECK(a.sense_resistance == 0.1);
  CHECK(a.low_freq_inductance == 280e-6);
  CHECK(a.series_resistance() == Catch::Approx(1.86));

  REQUIRE(cfg.measured.has_value());
  CHECK(cfg.measured->torque_constant == Catch::Approx(1.906e-3));
  CHECK(cfg.measured->magnetic_spring == Catch::Approx(0.636e-3));
  CHECK(cfg.measured->restoration_peak() == Catch::Approx(0.318e-3));
  CHECK(cfg.measured->total_stiffness == Catch::Approx(1.3e-3));
  CHECK(cfg.measured->total_damping == Catch::Approx(4.49e-7));
  CHECK(cfg.measured->inertia == Catch::Approx(1.65e-9));

  REQUIRE(cfg.eddy.has_value());
  CHECK(cfg.eddy->musigma_iron == Catch::Approx(3.2035));
  CHECK(cfg.eddy->musigma_magnet == Catch::Approx(2.8227));
  REQUIRE(cfg.lugre.has_value());
  CHECK(cfg.lugre->sigma_s == Catch::Approx(0.664e-3));
}

TEST_CASE("unknown keys are rejected with their line number") {
  std::istringstream in(table1_text() + "mystery_key = 1\n");
  try {
    parse_config(in);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("mystery_key") != std::string::npos);
    CHECK(e.line > 0);
  }
}

TEST_CASE("missing required keys are reported by name") {
  std::string text = table1_text();
  const auto pos = text.find("turns");
  text.erase(pos, text.find('\n', pos) - pos + 1);
  std::istringstream in(text);
  try {
    parse_config(in);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("turns") != std::string::npos);
  }
}

TEST_CASE("duplicate keys are rejected") {
  std::istringstream in(table1_text() + "turns = 100\n");
  CHECK_THROWS_AS(parse_config(in), config_error);
}

TEST_CASE("partial measured group names the missing key") {
  std::string text = table1_text();
  const auto pos = text.find("inertia_kgm2");
  text.erase(pos, text.find('\n', pos) - pos + 1);
  std::istringstream in(text);
  try {
    parse_config(in);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("inertia_kgm2") != std::string::npos);
  }
}

TEST_CASE("stack consistency is enforced within 5%") {
  Config cfg = table1();
  cfg.actuator.lamination_count = 14;  // 14 x 0.35 mm = 4.9 mm vs 4.191 mm
  std::istringstream in(write_config(cfg));
  CHECK_THROWS_AS(parse_config(in), config_error);
}

TEST_CASE("radius ordering is enforced") {
  Config cfg = table1();
  cfg.actuator.rotor_radius = 2.0e-3;  // larger than the minor radius
  std::istringstream in(write_config(cfg));
  CHECK_THROWS_AS(parse_config(in), config_error);
}

TEST_CASE("write/parse round trip is bit exact") {
  const Config cfg = table1();
  std::istringstream in(write_config(cfg));
  const Config back = parse_config(in);
  CHECK(write_config(back) == write_config(cfg));
  CHECK(back.actuator.low_freq_inductance == cfg.actuator.low_freq_inductance);
  CHECK(back.measured->torque_constant == cfg.measured->torque_constant);
  CHECK(back.lugre->breakaway == cfg.lugre->breakaway);
}

TEST_CASE("comments and blank lines are ignored") {
  std::istringstream in("# leading comment\n\n" + table1_text() + "\n# trailing\n");
  CHECK_NOTHROW(parse_config(in));
}

TEST_CASE("malformed lines carry line numbers") {
  std::istringstream in("outer_diameter_m 13.7e-3\n");
  try {
    parse_config(in);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(e.line == 1);
  }
}
