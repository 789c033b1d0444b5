#include "fracwave/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <sstream>

#include "fracwave/error.hpp"
#include "fracwave/estimators.hpp"
#include "fracwave/propagator.hpp"

namespace fracwave {

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DeterministicZ bump(int d) {
  DeterministicZ z;
  z.shape = GaussianBump{d, 1.0};
  return z;
}

SolverConfig base_config(double k, double beta, double T, double L, int N, double dt) {
  SolverConfig c;
  c.params = {k, 1, T};
  c.measure = RieszKernel{beta, 1, 1.0};
  c.grid = make_grid(1, L, N);
  c.dt = dt;
  c.seed = kAcceptanceSeed;
  return c;
}

Outcome isometry(bool full, unsigned workers) {
  const int N = full ? 512 : 256, paths = full ? 2000 : 400;
  const double dt = full ? std::ldexp(1.0, -10) : std::ldexp(1.0, -9), tol = full ? 0.05 : 0.10;
  SolverConfig c = base_config(1.0, 0.5, 1.0, 8.0, N, dt);
  c.forced_Z = bump(1);
  const MomentEstimate e = mc_moment(c, 1.0, 0.25, 2.0, paths, {workers});
  const double I = isometry_functional(c.measure, 1.0, 0.25, bump(1), 1.0, true);
  const double rel = std::abs(e.mean / I - 1.0);
  return {rel <= tol, fmt("mc %.4f +- %.4f, quadrature %.4f, rel err %.4f (tol %.2f, N=%d, %d paths)", e.mean,
                          e.std_error, I, rel, tol, N, paths)};
}

Outcome quadrature_rate() {
  struct Case {
    double k, beta, alpha;
    int d;
  };
  const Case cases[] = {{1, 0.5, 0, 1}, {2, 1, 0.25, 1}, {1, 1, 0, 2}};
  std::vector<double> lags;
  for (int e = 3; e <= 10; ++e) lags.push_back(std::ldexp(1.0, -e));
  bool pass = true;
  std::ostringstream s;
  for (const Case& c : cases) {
    const double target = 2 - (c.beta + 2 * c.alpha) / c.k;
    const PowerLawFit f = scaling_slope(RieszKernel{c.beta, c.d, 1.0}, c.k, c.alpha, bump(c.d), 0.5, lags);
    const bool ok = std::abs(f.slope - target) <= 0.05;
    pass = pass && ok;
    s << fmt("(k=%g,b=%g,a=%g,d=%d) slope %.4f vs %.4f %s; ", c.k, c.beta, c.alpha, c.d, f.slope, target,
             ok ? "ok" : "MISS");
  }
  return {pass, s.str() + "tol 0.05"};
}

Outcome mc_scaling(bool full, unsigned workers) {
  const int N = full ? 4096 : 1024, paths = full ? 2000 : 300, smallest = full ? 7 : 6;
  const double dt = full ? std::ldexp(1.0, -11) : std::ldexp(1.0, -10), widen = full ? 0.0 : 0.1;
  SolverConfig c = base_config(1.0, 0.5, 0.5 + 0.125, 8.0, N, dt);
  c.forced_Z = bump(1);
  std::vector<double> lags;
  for (int e = 3; e <= smallest; ++e) lags.push_back(std::ldexp(1.0, -e));
  const ScalingFit f = mc_increment_scaling(c, 0.5, lags, 0.0, 2.0, paths, {workers});
  const bool contains = f.slope_ci_lo - widen <= 1.5 && 1.5 <= f.slope_ci_hi + widen;
  const bool excludes = f.slope_ci_hi < 1.7;
  return {contains && excludes,
          fmt("slope %.4f, 95%% CI [%.4f, %.4f]%s, contains 1.5: %s, excludes 1.7: %s (lags 2^-3..2^-%d, N=%d, "
              "%d paths%s)",
              f.slope, f.slope_ci_lo, f.slope_ci_hi, f.dropped_largest_lag ? ", largest lag dropped" : "",
              contains ? "yes" : "no", excludes ? "yes" : "no", smallest, N, paths,
              full ? "" : ", CI widened by 0.1")};
}

Outcome condition_sweep() {
  std::mt19937_64 rng(kAcceptanceSeed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  int agree = 0, total = 0, near = 0;
  std::string first_miss;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 3;
    double k = uni(0.3, 2.5), alpha, beta, eta;
    const double b0 = uni(0.05, d - 0.05), sign = (i / 4) % 2 ? 1.0 : -1.0;
    switch (i % 4) {
      case 0:
      case 1:  // Dalang boundary
        k = std::max(k, b0 / 2 + 0.05);
        alpha = k - b0 / 2;
        beta = b0 + (i % 4 == 0 ? 0.01 : -0.01);
        eta = uni(alpha / k, 1.0);
        ++near;
        break;
      case 2:  // eta boundary
        k = std::max(k, b0 / 2 + 0.1);
        alpha = uni(0.0, k - b0 / 2 - 0.05);
        eta = (b0 / 2 + alpha) / k;
        beta = b0 + 0.01 * sign;
        ++near;
        break;
      default:
        alpha = uni(0.0, 0.95 * k);
        beta = uni(0.02, static_cast<double>(d));
        eta = uni(alpha / k + 1e-3, 1.0);
    }
    beta = std::clamp(beta, 1e-3, static_cast<double>(d));
    eta = std::clamp(eta, alpha / k + 1e-6, 1.0 - 1e-6);
    const SpectralMeasure mu = RieszKernel{beta, d, 1.0};
    const QuadratureSettings qs;
    const bool a1 = check_dalang_condition(mu, k, alpha, qs).holds;
    const bool q1 = check_dalang_condition(mu, k, alpha, qs, MethodChoice::ForceQuadrature).holds;
    const bool a2 = check_eta_condition(mu, k, alpha, eta, qs).holds;
    const bool q2 = check_eta_condition(mu, k, alpha, eta, qs, MethodChoice::ForceQuadrature).holds;
    ++total;
    if (a1 == q1 && a2 == q2) {
      ++agree;
    } else if (first_miss.empty()) {
      first_miss = fmt("; first miss k=%.4f a=%.4f b=%.4f eta=%.4f d=%d", k, alpha, beta, eta, d);
    }
  }
  return {agree == total, fmt("%d/%d tuples agree on both conditions (%d near-boundary)", agree, total, near) +
                              first_miss};
}

Outcome bounds() {
  long checks = 0, violations = 0;
  for (double k : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    for (double T : {0.5, 1.0, 2.0}) {
      const Propagator p{k, T};
      for (int i = 0; i <= 200; ++i) {
        const double t = T * i / 200;
        for (int j = -1; j <= 400; ++j) {
          const double r = j < 0 ? 0.0 : std::pow(10.0, -6 + 12.0 * j / 400);
          const double g = fourier_G(p, t, r);
          ++checks;
          if (g * g > kernel_bound(p, r) * (1 + 1e-6)) ++violations;
        }
      }
    }
  }
  long shift_checks = 0, shift_violations = 0;
  struct Case {
    double beta;
    int d;
    double gamma;
  };
  const Case cases[] = {{0.5, 1, 1.0}, {0.5, 1, 0.75}, {1.0, 1, 1.75}, {1.0, 2, 1.0}, {1.5, 2, 0.8}, {2.0, 3, 1.5}};
  for (const Case& c : cases) {
    const SpectralMeasure mu = RieszKernel{c.beta, c.d, 1.0};
    const std::vector<double> origin(c.d, 0.0);
    const double at0 = shifted_condition_integral(mu, c.gamma, origin);
    for (int i = 0; i < 50; ++i) {
      const double m = -20.0 + 40.0 * i / 49;
      std::vector<double> xi(c.d, m / std::sqrt(static_cast<double>(c.d)));
      ++shift_checks;
      if (shifted_condition_integral(mu, c.gamma, xi) > at0 * (1 + 1e-6)) ++shift_violations;
    }
  }
  return {violations == 0 && shift_violations == 0,
          fmt("kernel bound: %ld violations in %ld samples; shift bound: %ld violations in %ld grid points", violations,
              checks, shift_violations, shift_checks)};
}

Outcome linear_exactness() {
  std::mt19937_64 rng(kAcceptanceSeed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double closed = 0, group = 0, energy = 0, path = 0;
  for (double k : {0.5, 1.0, 2.0}) {
    const GridSpec g = make_grid(1, 4.0, 64);
    const ModeTable mt = mode_table(g);
    StateVector s0{zero_spectral(g), zero_spectral(g)};
    for (std::size_t i = 0; i < g.modes(); ++i) {
      s0.position.coefficients[i] = {normal(rng), normal(rng)};
      s0.velocity.coefficients[i] = {normal(rng), normal(rng)};
    }
    const Propagator p{k, 1.0};
    for (int trial = 0; trial < 5; ++trial) {
      const double dt1 = unit(rng), dt2 = unit(rng);
      const int splits = 1 + static_cast<int>(8 * unit(rng));
      StateVector s = s0;
      for (int n = 0; n < splits; ++n) s = linear_propagate(s, dt1 / splits, k);
      const StateVector once = linear_propagate(s0, dt1 + dt2, k);
      const StateVector twice = linear_propagate(linear_propagate(s0, dt2, k), dt1, k);
      for (std::size_t i = 0; i < g.modes(); ++i) {
        const double r = mt.xi_norm[i], w = r == 0 ? 0.0 : std::pow(r, k);
        const auto u0 = s0.position.coefficients[i], v0 = s0.velocity.coefficients[i];
        const auto u = std::cos(dt1 * w) * u0 + fourier_G(p, dt1, r) * v0;
        const auto v = -w * std::sin(dt1 * w) * u0 + std::cos(dt1 * w) * v0;
        const double scale = std::abs(u0) * std::max(1.0, w) + std::abs(v0);
        closed = std::max(closed, std::abs(s.position.coefficients[i] - u) * std::max(1.0, w) / scale);
        closed = std::max(closed, std::abs(s.velocity.coefficients[i] - v) / scale);
        group = std::max(group, std::abs(once.position.coefficients[i] - twice.position.coefficients[i]) *
                                    std::max(1.0, w) / scale);
        group = std::max(group, std::abs(once.velocity.coefficients[i] - twice.velocity.coefficients[i]) / scale);
        const double e0 = w * w * std::norm(u0) + std::norm(v0);
        const double e1 = w * w * std::norm(once.position.coefficients[i]) + std::norm(once.velocity.coefficients[i]);
        energy = std::max(energy, std::abs(e1 - e0) / e0);
      }
    }
    // Whole-path check against the closed form with a step that does not divide T.
    SolverConfig c;
    c.params = {k, 1, 1.0};
    c.measure = FlatDensity{0.0, 1};
    c.grid = g;
    c.dt = 0.3;
    c.store_states = true;
    c.v0 = zero_real(g);
    c.v0_tilde = zero_real(g);
    for (auto& x : c.v0.values) x = normal(rng);
    for (auto& x : c.v0_tilde.values) x = normal(rng);
    const Trajectory tr = solve_path(c);
    const SpectralField u0 = forward(c.v0), v0 = forward(c.v0_tilde);
    double ref = 0;
    for (std::size_t i = 0; i < g.modes(); ++i) ref = std::max(ref, std::abs(u0.coefficients[i]) + std::abs(v0.coefficients[i]));
    for (std::size_t i = 0; i < g.modes(); ++i) {
      const double r = mt.xi_norm[i], w = r == 0 ? 0.0 : std::pow(r, k);
      const auto u = std::cos(w) * u0.coefficients[i] + fourier_G(p, 1.0, r) * v0.coefficients[i];
      path = std::max(path, std::abs(tr.states.back().position.coefficients[i] - u) / ref);
    }
  }
  const bool pass = closed <= 1e-12 && group <= 1e-12 && energy <= 1e-12 && path <= 1e-12;
  return {pass, fmt("max rel errors: closed form %.2e, group %.2e, energy %.2e, solve_path %.2e (tol 1e-12)", closed,
                    group, energy, path)};
}

Outcome frontier(bool full, unsigned workers) {
  const int paths = full ? 400 : 60;
  SolverConfig c = base_config(1.0, 0.5, 1.0, 8.0, 256, std::ldexp(1.0, -10));
  c.forced_Z = bump(1);
  const double alphas[] = {0.2, 0.4, 0.6, 0.7, 0.8, 0.9, 0.95};
  const FrontierReport rep = regularity_frontier(c, 1.0, alphas, paths, {}, {workers});
  bool pass = rep.inconclusive_width <= 0.2 + 1e-12;
  std::ostringstream s;
  for (const auto& r : rep.rows) {
    const bool want_finite = r.alpha < 0.65, want_divergent = r.alpha > 0.85;
    if (want_finite && r.verdict != GrowthVerdict::Finite) pass = false;
    if (want_divergent && r.verdict != GrowthVerdict::Divergent) pass = false;
    s << fmt("a=%.2f %s; ", r.alpha, to_string(r.verdict).c_str());
  }
  s << fmt("crossover %.3f (predicted 0.75), inconclusive width %.2f (%d paths)", rep.crossover,
           rep.inconclusive_width, paths);
  return {pass, s.str()};
}

Outcome boundedness(bool full, unsigned workers) {
  const int paths = full ? 400 : 80;
  const int N0 = full ? 256 : 128;
  const double dt0 = full ? std::ldexp(1.0, -8) : std::ldexp(1.0, -7);
  SolverConfig c = base_config(1.0, 0.5, 1.0, 8.0, N0, dt0);
  c.sigma = make_coefficient("sine_bounded", 1.0);
  c.b = make_coefficient("linear", 0.5);
  c.v0_bump_amplitude = 1.0;
  const RefinementStudy st = moment_refinement(c, 1.0, 0.25, paths, 3, {workers});
  std::ostringstream s;
  for (const auto& l : st.levels)
    s << fmt("N=%d dt=2^%d: %.4f +- %.4f; ", l.N, static_cast<int>(std::log2(l.dt)), l.estimate.mean,
             l.estimate.std_error);
  s << fmt("refinement slope %.4f +- %.4f (%d paths per level)", st.slope, st.slope_se, paths);
  return {st.bounded, s.str()};
}

Outcome picard() {
  SolverConfig c = base_config(1.0, 0.5, 0.5, 8.0, 256, std::ldexp(1.0, -10));
  c.sigma = make_coefficient("linear", 0.5);
  c.v0_bump_amplitude = 1.0;
  const PicardResult pr = picard_iterate(c, 30);
  bool below = true, decreasing = true;
  std::ostringstream s;
  s << "ratios";
  double prev = 0;
  for (int i = 1; i <= 5; ++i) {
    const double r = pr.distances[i] / pr.distances[i - 1];
    below = below && r < 0.9;
    if (i > 1 && !(r < prev)) decreasing = false;
    s << fmt(" %.4f", r);
    prev = r;
  }
  c.store_states = true;
  const Trajectory tr = solve_path(c);
  const RealField u = inverse(tr.states.back().position);
  double acc = 0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double d = u.values[i] - pr.final_positions.back().values[i];
    acc += d * d;
  }
  const double gap = std::sqrt(acc * c.grid.dx);
  s << fmt("; < 0.9: %s, decreasing: %s; fixed point vs solve_path %.2e (tol 1e-8)", below ? "yes" : "no",
           decreasing ? "yes" : "no", gap);
  return {below && decreasing && gap <= 1e-8, s.str()};
}

Outcome noise(bool full) {
  const int n = full ? 10000 : 2000;
  const GridSpec g = make_grid(1, 8.0, 256);
  const CovarianceReport riesz = validate_covariance(make_noise_spec(RieszKernel{0.5, 1, 1.0}, g), n, kAcceptanceSeed);
  const CovarianceReport flat = validate_covariance(make_noise_spec(FlatDensity{1.0, 1}, g), n, kAcceptanceSeed + 1);
  const double imag = std::max(riesz.max_imaginary_residue, flat.max_imaginary_residue);
  const bool pass = riesz.pass && flat.pass && imag <= 1e-12;
  return {pass, fmt("riesz: %zu/%zu modes outside band, flat: %zu/%zu; max imaginary residue %.2e (%d samples)",
                    riesz.modes_outside_band, riesz.modes_tested, flat.modes_outside_band, flat.modes_tested, imag, n)};
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  return fmt("%s %2d %-20s %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

std::vector<CriterionResult> run_acceptance(AcceptanceScale scale, unsigned workers,
                                            const std::function<void(const CriterionResult&)>& sink,
                                            const std::vector<int>& only) {
  const bool full = scale == AcceptanceScale::Full;
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "isometry", [&] { return isometry(full, workers); }},
      {2, "increment-rate", [] { return quadrature_rate(); }},
      {3, "mc-scaling", [&] { return mc_scaling(full, workers); }},
      {4, "condition-checker", [] { return condition_sweep(); }},
      {5, "kernel-shift-bounds", [] { return bounds(); }},
      {6, "linear-exactness", [] { return linear_exactness(); }},
      {7, "regularity-frontier", [&] { return frontier(full, workers); }},
      {8, "moment-boundedness", [&] { return boundedness(full, workers); }},
      {9, "picard-contraction", [] { return picard(); }},
      {10, "noise-validation", [&] { return noise(full); }},
  };
  std::vector<CriterionResult> out;
  for (const Entry& e : entries) {
    if (!only.empty() && std::find(only.begin(), only.end(), e.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{e.id, e.name, false, "", 0.0};
    try {
      const Outcome o = e.run();
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& ex) {
      r.detail = std::string("error: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fracwave
