#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "fracwave/fracwave.h"

namespace {

const std::string kData = FRACWAVE_TEST_DATA;

}  // namespace

TEST_CASE("version and errors") {
  CHECK(std::string(fw_version()) == "0.1.0");
  fw_measure* m = nullptr;
  CHECK(fw_measure_riesz(2.0, 1, 1.0, &m) == FW_ERR_DOMAIN);
  CHECK(m == nullptr);
  CHECK(std::string(fw_last_error()).find("beta") != std::string::npos);
  CHECK(fw_measure_riesz(0.5, 1, 1.0, nullptr) == FW_ERR_NULL);
  fw_measure_free(nullptr);
}

TEST_CASE("condition checks through the C interface") {
  fw_measure* m = nullptr;
  REQUIRE(fw_measure_riesz(1.0, 1, 1.0, &m) == FW_OK);
  fw_condition c{};
  REQUIRE(fw_check_dalang(m, 2.0, 0.5, 0, &c) == FW_OK);
  CHECK(c.holds == 1);
  CHECK(c.value == doctest::Approx(2.0));
  CHECK(c.used_quadrature == 0);
  REQUIRE(fw_check_dalang(m, 2.0, 0.5, 1, &c) == FW_OK);
  CHECK(c.holds == 1);
  CHECK(c.used_quadrature == 1);
  REQUIRE(fw_check_dalang(m, 1.0, 0.75, 0, &c) == FW_OK);
  CHECK(c.holds == 0);
  CHECK(c.status == 1);
  double a = 0;
  REQUIRE(fw_max_alpha(m, 2.0, &a) == FW_OK);
  CHECK(a == doctest::Approx(1.5));
  CHECK(fw_check_eta(m, 1.0, 0.5, 0.2, 0, &c) == FW_ERR_DOMAIN);
  CHECK(fw_check_dalang(nullptr, 1.0, 0.0, 0, &c) == FW_ERR_NULL);
  fw_measure_free(m);

  const double loc[] = {0.0};
  const double mass[] = {1.0};
  REQUIRE(fw_measure_atoms(1, 1, loc, mass, &m) == FW_OK);
  REQUIRE(fw_check_dalang(m, 1.0, 0.0, 0, &c) == FW_OK);
  CHECK(c.value == doctest::Approx(1.0));
  fw_measure_free(m);

  REQUIRE(fw_measure_flat(0.0, 1, &m) == FW_OK);
  REQUIRE(fw_check_eta(m, 1.0, 0.0, 0.5, 0, &c) == FW_OK);
  CHECK(c.holds == 1);
  CHECK(c.value == 0.0);
  fw_measure_free(m);
}

TEST_CASE("quadrature functionals through the C interface") {
  fw_measure* m = nullptr;
  REQUIRE(fw_measure_riesz(0.5, 1, 1.0, &m) == FW_OK);
  double v = 0;
  REQUIRE(fw_isometry_bump(m, 1.0, 0.25, 1.0, 1.0, 1, &v) == FW_OK);
  CHECK(v == doctest::Approx(25.618337356000637).epsilon(1e-6));
  REQUIRE(fw_increment_moment_bump(m, 1.0, 0.0, 1.0, 0.5, 0.75, &v) == FW_OK);
  CHECK(v == doctest::Approx(3.460928398322734).epsilon(1e-6));
  CHECK(fw_increment_moment_bump(m, 1.0, 0.0, 1.0, 0.75, 0.5, &v) == FW_ERR_DOMAIN);
  fw_measure_free(m);
}

TEST_CASE("fw_run") {
  const std::string config = kData + "/check.json";
  const std::string out = "fracwave_capi_out";
  fw_run_options o{};
  o.config_path = config.c_str();
  o.out_dir = out.c_str();
  o.workers = 1;
  int code = -1;
  REQUIRE(fw_run(&o, &code) == FW_OK);
  CHECK(code == 0);
  const char* overrides[] = {"solver.alpha=1.6"};
  o.overrides = overrides;
  o.n_overrides = 1;
  o.check = 1;
  REQUIRE(fw_run(&o, &code) == FW_OK);
  CHECK(code == 4);
  CHECK(fw_run(nullptr, &code) == FW_ERR_NULL);
}

TEST_CASE("self-test scale validation") {
  int failed = 0;
  CHECK(fw_self_test("medium", 1, &failed) == FW_ERR_DOMAIN);
}
