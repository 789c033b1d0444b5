#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fracwave/error.hpp"
#include "fracwave/experiment.hpp"
#include "json.hpp"

using namespace fracwave;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kData = FRACWAVE_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracwave_test_experiment_" + name);
  fs::remove_all(p);
  return p;
}

struct Run {
  int code;
  std::string log;
  fs::path dir;
};

Run run(const std::string& config, const std::string& name, std::vector<std::string> overrides = {},
        bool check = false) {
  RunOptions o;
  o.config_path = kData + "/" + config;
  o.out_dir = fresh_dir(name).string();
  o.overrides = std::move(overrides);
  o.workers = 1;
  o.check = check;
  std::ostringstream log;
  const int code = run_experiment(o, log);
  return {code, log.str(), o.out_dir};
}

}  // namespace

TEST_CASE("fnv1a64") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("materialized config") {
  const std::string text = slurp(kData + "/check.json");
  const json echo = json::parse(materialize_config(text, {}));
  CHECK(echo["grid"]["N"] == 512);
  CHECK(echo["grid"]["L"] == 8.0);
  CHECK(echo["solver"]["seed"] == 0);
  CHECK(echo["measure"]["constant"] == 1.0);
  CHECK(echo["experiment"]["method"] == "auto");
  CHECK(echo["quadrature"]["rel_tol"] == 1e-8);
  SUBCASE("key order and whitespace do not change the canonical text") {
    const std::string reordered =
        R"({"experiment":{"kind":"check"},"solver":{"alpha":0.5},"measure":{"beta":1,"type":"riesz"},"model":{"T":1,"d":1,"k":2}})";
    CHECK(materialize_config(reordered, {}) == materialize_config(text, {}));
  }
  SUBCASE("the echo is a fixed point") {
    const std::string once = materialize_config(text, {});
    CHECK(materialize_config(once, {}) == once);
  }
}

TEST_CASE("strict schema") {
  const std::string base = slurp(kData + "/check.json");
  CHECK_THROWS_AS(materialize_config(slurp(kData + "/unknown_key.json"), {}), DomainError);
  CHECK_THROWS_AS(materialize_config(R"({"experiment":{"kind":"check"},"extra":1})", {}), DomainError);
  CHECK_THROWS_AS(materialize_config(R"({"experiment":{"kind":"check","bogus":1}})", {}), DomainError);
  CHECK_THROWS_AS(materialize_config(R"({"experiment":{"kind":"nope"}})", {}), DomainError);
  CHECK_THROWS_AS(materialize_config(R"({"model":{"k":"two"},"experiment":{"kind":"check"}})", {}), DomainError);
  CHECK_THROWS_AS(materialize_config(R"({"model":{"k":1},})", {}), DomainError);
  CHECK_THROWS_AS(materialize_config(R"({"model":{"k":1}})", {}), DomainError);
  CHECK_THROWS_AS(materialize_config(base, {"grid.N=100"}), DomainError);
  CHECK_THROWS_AS(materialize_config(base, {"no_equals_sign"}), DomainError);
  try {
    materialize_config(slurp(kData + "/bad_beta.json"), {});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
}

TEST_CASE("seed precedence: flag over env over config") {
  const std::string text = R"({"solver":{"seed":5},"experiment":{"kind":"check"}})";
  auto seed = [&](std::vector<std::string> o, std::optional<std::string> env) {
    return json::parse(materialize_config(text, o, env))["solver"]["seed"].get<std::uint64_t>();
  };
  CHECK(seed({}, std::nullopt) == 5);
  CHECK(seed({}, "7") == 7);
  CHECK(seed({"solver.seed=9"}, "7") == 9);
  CHECK(seed({"solver.seed=9"}, std::nullopt) == 9);
  CHECK_THROWS_AS(seed({}, "seven"), DomainError);
}

TEST_CASE("run: check experiment") {
  const Run r = run("check.json", "check");
  CHECK(r.code == kExitOk);
  const std::string csv = slurp(r.dir / "check.csv");
  CHECK(csv.rfind("condition,value,holds,status,method,tolerance_used,tail_exponent\n", 0) == 0);
  const std::size_t row = csv.find("\nDalang_1_5,");
  REQUIRE(row != std::string::npos);
  const std::string fields = csv.substr(row + 12);
  CHECK(std::stod(fields) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fields.find(",true,finite,analytic,") != std::string::npos);
  const json manifest = json::parse(slurp(r.dir / "manifest.json"));
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["outputs"] == json::array({"config.json", "check.csv"}));
  const std::string echo = slurp(r.dir / "config.json");
  char digest[40];
  std::snprintf(digest, sizeof digest, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(json::parse(echo).dump())));
  CHECK(manifest["config_digest"] == digest);
}

TEST_CASE("run: exponents") {
  const Run r = run("exponents.json", "exponents");
  CHECK(r.code == kExitOk);
  const std::string csv = slurp(r.dir / "exponents.csv");
  CHECK(csv.find("\ntheta1,0.75\n") != std::string::npos);
  CHECK(csv.find("\nmoment_slope,1.5\n") != std::string::npos);
}

TEST_CASE("run: validation errors") {
  const Run r = run("bad_beta.json", "bad_beta");
  CHECK(r.code == kExitValidation);
  CHECK(r.log.find("beta must lie in ]0,d]") != std::string::npos);
  CHECK(run("unknown_key.json", "unknown").code == kExitValidation);
  CHECK(run("does_not_exist.json", "missing").code == kExitValidation);
}

TEST_CASE("run: --check failure exits 4") {
  const Run ok = run("check.json", "check_ok", {}, true);
  CHECK(ok.code == kExitOk);
  const Run bad = run("check.json", "check_bad", {"solver.alpha=1.6"}, true);
  CHECK(bad.code == kExitCheckFailed);
  CHECK(json::parse(slurp(bad.dir / "manifest.json"))["exit_code"] == kExitCheckFailed);
}

TEST_CASE("run: numerical failure exits 3") {
  const Run r = run("simulate.json", "blowup", {"solver.v0_bump=1e13"});
  CHECK(r.code == kExitNumerical);
  CHECK(r.log.find("blow-up") != std::string::npos);
}

TEST_CASE("run: simulate replays identically and lists every file") {
  const Run a = run("simulate.json", "sim_a"), b = run("simulate.json", "sim_b");
  REQUIRE(a.code == kExitOk);
  CHECK(slurp(a.dir / "norms.csv") == slurp(b.dir / "norms.csv"));
  CHECK(slurp(a.dir / "u_0002.bin") == slurp(b.dir / "u_0002.bin"));
  const json manifest = json::parse(slurp(a.dir / "manifest.json"));
  std::vector<std::string> listed = manifest["outputs"];
  listed.push_back("manifest.json");
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(a.dir)) {
    ++on_disk;
    CHECK(std::find(listed.begin(), listed.end(), e.path().filename().string()) != listed.end());
  }
  CHECK(on_disk == listed.size());
  // snapshots at 0, 0.25 and T
  const std::string norms = slurp(a.dir / "norms.csv");
  CHECK(std::count(norms.begin(), norms.end(), '\n') == 4);
}

TEST_CASE("run: unwritable output directory exits 1") {
  RunOptions o;
  o.config_path = kData + "/check.json";
  const fs::path blocker = fresh_dir("blocker");
  std::ofstream(blocker) << "x";
  o.out_dir = (blocker / "sub").string();
  std::ostringstream log;
  CHECK(run_experiment(o, log) == kExitIo);
  fs::remove(blocker);
}
