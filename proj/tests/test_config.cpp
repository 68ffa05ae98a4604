#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cellid/config_io.hpp"
#include "support/fixtures.hpp"

using namespace cellid;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "cellid_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << body;
  return path;
}

} // namespace

TEST_CASE("the checked-in configuration loads and matches the protocol") {
  const ConfigBundle& b = testing::config_bundle();

  CHECK(b.cell.estimands.c_n0 == 24000.0);
  CHECK(b.cell.estimands.c_max_p == 50000.0);
  CHECK(b.cell.fixed.nominal_capacity_ah == 2.0);
  CHECK(b.cell.fixed.v_min == 2.5);
  CHECK(b.cell.fixed.v_max == 4.3);

  CHECK(b.suite.c_rates.size() == 10);
  CHECK(b.suite.fitting_c_rate == 0.5);
  CHECK(b.suite.dt == 1.0);
  CHECK(b.suite.dst.steps.size() == 20);
  CHECK(b.suite.dst.period_s() == 360.0);

  CHECK(b.optimizer.lo_factor == 0.5);
  CHECK(b.optimizer.hi_factor == 1.5);
  CHECK(b.optimizer.pso.swarm_size == 40);
  CHECK(b.optimizer.pso.max_iterations == 100);
  CHECK(b.optimizer.pso.min_func_tolerance == 1e-8);
  CHECK(b.optimizer.ga.generations == 300);
  CHECK(b.optimizer.ga.parents_mating == 4);
  CHECK(b.optimizer.ga.population == 50);
  CHECK(b.optimizer.ga.genes == 11);
  CHECK(b.optimizer.ls.max_iterations == 200);
  CHECK(b.optimizer.penalty_voltage == 10.0);
  CHECK(b.optimizer.pooling == ValidationPooling::pooled);
}

TEST_CASE("missing fields are reported with their path") {
  const auto path = write_temp("missing.json", R"({"estimands": {"c_n0": 1.0}})");
  try {
    load_cell_parameters(path);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& ex) {
    const std::string what = ex.what();
    CHECK(what.find("estimands.c_p0") != std::string::npos);
  }
}

TEST_CASE("type mismatches are reported with their path") {
  const auto path = write_temp("badtype.json", R"({"steps": [{"duration_s": "ten"}]})");
  try {
    load_dst_template(path);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& ex) {
    CHECK(std::string(ex.what()).find("steps[0].duration_s") != std::string::npos);
  }
}

TEST_CASE("malformed json is a validation error") {
  const auto path = write_temp("broken.json", "{ not json");
  CHECK_THROWS_AS(load_dst_template(path), ValidationError);
  CHECK_THROWS_AS(load_cell_parameters(
                      std::filesystem::path("/nonexistent/reference_cell.json")),
                  ValidationError);
}

TEST_CASE("estimand invariants are enforced on load") {
  std::ifstream in(std::filesystem::path(CELLID_CONFIG_DIR) / "reference_cell.json");
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  SUBCASE("volume fraction above one") {
    auto broken = body;
    broken.replace(broken.find("\"eps_n\": 0.59"), 13, "\"eps_n\": 1.20");
    CHECK_THROWS_AS(load_cell_parameters(write_temp("eps.json", broken)), ValidationError);
  }
  SUBCASE("initial concentration above the maximum") {
    auto broken = body;
    broken.replace(broken.find("\"c_n0\": 24000.0"), 15, "\"c_n0\": 99999.0");
    CHECK_THROWS_AS(load_cell_parameters(write_temp("c0.json", broken)), ValidationError);
  }
  SUBCASE("voltage window inverted") {
    auto broken = body;
    broken.replace(broken.find("\"v_min\": 2.5"), 12, "\"v_min\": 9.5");
    CHECK_THROWS_AS(load_cell_parameters(write_temp("vmin.json", broken)), ValidationError);
  }
}

TEST_CASE("ocp curves accept tables and reject bad ones") {
  CHECK_THROWS_AS(OcpCurve::table({0.0, 0.5}, {1.0}), ValidationError);      // length
  CHECK_THROWS_AS(OcpCurve::table({0.0, 0.0, 1.0}, {1, 2, 3}), ValidationError); // not increasing
  CHECK_THROWS_AS(OcpCurve::table({0.1, 1.0}, {1, 2}), ValidationError);     // misses theta=0

  const OcpCurve u = OcpCurve::table({0.0, 0.5, 1.0}, {1.0, 2.0, 5.0});
  CHECK(u(0.0) == 1.0);
  CHECK(u(0.25) == doctest::Approx(1.5));
  CHECK(u(0.5) == 2.0);
  CHECK(u(0.75) == doctest::Approx(3.5));
  CHECK(u(1.0) == 5.0);
}

TEST_CASE("a dense table reproduces the analytic curve it samples") {
  const OcpCurve& analytic = testing::reference_cell().ocp_p;
  std::vector<double> theta, pot;
  for (int i = 0; i <= 2000; ++i) {
    theta.push_back(static_cast<double>(i) / 2000.0);
    pot.push_back(analytic(theta.back()));
  }
  const OcpCurve table = OcpCurve::table(theta, pot);
  for (double t : {0.01, 0.123, 0.5, 0.789, 0.999})
    CHECK(table(t) == doctest::Approx(analytic(t)).epsilon(1e-6));
}

TEST_CASE("suite spec validation") {
  SuiteSpec spec;
  spec.fitting_c_rate = 0.25; // not in the rate list
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = SuiteSpec{};
  spec.window_margin = 0.5;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = SuiteSpec{};
  CHECK_NOTHROW(spec.validate());
}
