#include "fracwave/fracwave.h"

#include <cstdio>
#include <iostream>
#include <string>

#include "fracwave/acceptance.hpp"
#include "fracwave/error.hpp"
#include "fracwave/experiment.hpp"
#include "fracwave/quadrature.hpp"
#include "fracwave/solver.hpp"

struct fw_measure {
  fracwave::SpectralMeasure mu;
};

namespace {

thread_local std::string g_error;

template <class Fn>
fw_status guarded(Fn fn) {
  try {
    fn();
    g_error.clear();
    return FW_OK;
  } catch (const fracwave::Error& e) {
    g_error = e.what();
    switch (e.kind()) {
      case fracwave::ErrorKind::Domain: return FW_ERR_DOMAIN;
      case fracwave::ErrorKind::Numerical: return FW_ERR_NUMERICAL;
      case fracwave::ErrorKind::Io: return FW_ERR_IO;
    }
    return FW_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = std::string("internal: ") + e.what();
    return FW_ERR_INTERNAL;
  } catch (...) {
    g_error = "internal: unknown exception";
    return FW_ERR_INTERNAL;
  }
}

fw_status null_arg(const char* what) {
  g_error = std::string("capi: ") + what + " is NULL";
  return FW_ERR_NULL;
}

fw_status make(fracwave::SpectralMeasure mu, fw_measure** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    fracwave::validate_measure(mu);
    *out = new fw_measure{std::move(mu)};
  });
}

void fill(const fracwave::ConditionReport& r, fw_condition* out) {
  out->value = r.value;
  out->holds = r.holds ? 1 : 0;
  out->status = static_cast<int>(r.status);
  out->used_quadrature = r.method == fracwave::ConditionMethod::Quadrature ? 1 : 0;
}

fracwave::DeterministicZ bump(const fw_measure* mu, double amplitude) {
  fracwave::DeterministicZ z;
  z.shape = fracwave::GaussianBump{fracwave::dimension_of(mu->mu), amplitude};
  return z;
}

fracwave::MethodChoice choice(int force) {
  return force ? fracwave::MethodChoice::ForceQuadrature : fracwave::MethodChoice::Auto;
}

}  // namespace

extern "C" {

const char* fw_last_error(void) { return g_error.c_str(); }
const char* fw_version(void) { return fracwave::kToolVersion; }

fw_status fw_measure_riesz(double beta, int d, double constant, fw_measure** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new fw_measure{fracwave::riesz_measure(beta, d, constant > 0 ? std::optional<double>(constant)
                                                                        : std::nullopt)};
  });
}

fw_status fw_measure_flat(double level, int d, fw_measure** out) { return make(fracwave::FlatDensity{level, d}, out); }

fw_status fw_measure_atoms(int d, size_t n_atoms, const double* locations, const double* masses, fw_measure** out) {
  if (n_atoms > 0 && (!locations || !masses)) return null_arg("locations or masses");
  if (d < 1 || d > fracwave::kMaxDimension) {
    g_error = "capi: d must lie in [1, 3]";
    return FW_ERR_DOMAIN;
  }
  fracwave::FiniteAtoms atoms{d, {}};
  for (size_t i = 0; i < n_atoms; ++i)
    atoms.atoms.push_back({std::vector<double>(locations + i * d, locations + (i + 1) * d), masses[i]});
  return make(std::move(atoms), out);
}

void fw_measure_free(fw_measure* m) { delete m; }

fw_status fw_check_dalang(const fw_measure* mu, double k, double alpha, int force_quadrature, fw_condition* out) {
  if (!mu || !out) return null_arg("mu or out");
  return guarded([&] { fill(fracwave::check_dalang_condition(mu->mu, k, alpha, {}, choice(force_quadrature)), out); });
}

fw_status fw_check_eta(const fw_measure* mu, double k, double alpha, double eta, int force_quadrature,
                       fw_condition* out) {
  if (!mu || !out) return null_arg("mu or out");
  return guarded(
      [&] { fill(fracwave::check_eta_condition(mu->mu, k, alpha, eta, {}, choice(force_quadrature)), out); });
}

fw_status fw_max_alpha(const fw_measure* mu, double k, double* out) {
  if (!mu || !out) return null_arg("mu or out");
  return guarded([&] { *out = fracwave::max_alpha(mu->mu, k); });
}

fw_status fw_isometry_bump(const fw_measure* mu, double k, double alpha, double amplitude, double T, int reversed,
                           double* out) {
  if (!mu || !out) return null_arg("mu or out");
  return guarded(
      [&] { *out = fracwave::isometry_functional(mu->mu, k, alpha, bump(mu, amplitude), T, reversed != 0); });
}

fw_status fw_increment_moment_bump(const fw_measure* mu, double k, double alpha, double amplitude, double t1,
                                   double t2, double* out) {
  if (!mu || !out) return null_arg("mu or out");
  return guarded(
      [&] { *out = fracwave::increment_second_moment(mu->mu, k, alpha, bump(mu, amplitude), t1, t2); });
}

fw_status fw_run(const fw_run_options* options, int* exit_code) {
  if (!options || !exit_code || !options->config_path) return null_arg("options, config_path or exit_code");
  return guarded([&] {
    fracwave::RunOptions o;
    o.config_path = options->config_path;
    if (options->out_dir) o.out_dir = options->out_dir;
    for (size_t i = 0; i < options->n_overrides; ++i) o.overrides.emplace_back(options->overrides[i]);
    o.workers = options->workers;
    o.check = options->check != 0;
    if (options->env_seed) o.env_seed = std::string(options->env_seed);
    *exit_code = fracwave::run_experiment(o, std::cerr);
  });
}

fw_status fw_self_test(const char* scale, unsigned workers, int* failed) {
  if (!scale || !failed) return null_arg("scale or failed");
  const std::string s = scale;
  if (s != "quick" && s != "full") {
    g_error = "capi: scale must be 'quick' or 'full'";
    return FW_ERR_DOMAIN;
  }
  return guarded([&] {
    int n = 0;
    fracwave::run_acceptance(s == "full" ? fracwave::AcceptanceScale::Full : fracwave::AcceptanceScale::Quick,
                             workers, [&](const fracwave::CriterionResult& r) {
                               std::printf("%s\n", fracwave::format_result(r).c_str());
                               std::fflush(stdout);
                               n += r.pass ? 0 : 1;
                             });
    *failed = n;
  });
}

void fw_set_fault_injection(int enabled) { fracwave::set_fault_injection(enabled != 0); }

}  // extern "C"
