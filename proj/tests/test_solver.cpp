#include <cmath>
#include <random>

#include "doctest.h"
#include "fracwave/error.hpp"
#include "fracwave/propagator.hpp"
#include "fracwave/solver.hpp"

using namespace fracwave;

namespace {

// Real field cos(xi_j x) on the grid; its only stored coefficient is L at mode j.
RealField cosine_mode(const GridSpec& g, int j) {
  RealField f = zero_real(g);
  for (int m = 0; m < g.N; ++m) f.values[m] = std::cos(j * g.dxi * (-g.L + m * g.dx));
  return f;
}

SolverConfig quiet_config(double k, double T, int N, double dt) {
  SolverConfig c;
  c.params = {k, 1, T};
  c.grid = make_grid(1, 4.0, N);
  c.dt = dt;
  return c;
}

StateVector random_state(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  StateVector s{zero_spectral(g), zero_spectral(g)};
  for (auto& c : s.position.coefficients) c = {n(rng), n(rng)};
  for (auto& c : s.velocity.coefficients) c = {n(rng), n(rng)};
  s.position.coefficients[0].imag(0);
  s.velocity.coefficients[0].imag(0);
  s.position.coefficients.back().imag(0);
  s.velocity.coefficients.back().imag(0);
  return s;
}

double rel_diff(const SpectralField& a, const SpectralField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
    num = std::max(num, std::abs(a.coefficients[i] - b.coefficients[i]));
    den = std::max(den, std::abs(b.coefficients[i]));
  }
  return num / den;
}

}  // namespace

TEST_CASE("coefficient registry") {
  const CoefficientFn s = make_coefficient("sine_bounded", -1.5);
  CHECK(s.growth_constant() == 1.5);
  const CoefficientFn l = make_coefficient("linear", 0.5);
  CHECK(l.growth_constant() == 0.5);
  CHECK(make_coefficient("zero", 0.0).growth_constant() == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-50, 50);
  for (int i = 0; i < 100; ++i) {
    const double z = U(rng);
    CHECK(std::abs(s(z)) <= s.growth_constant() * std::abs(z) + 1e-15);
    CHECK(std::abs(l(z)) <= l.growth_constant() * std::abs(z) + 1e-15);
  }
  CHECK(std::isinf(make_coefficient("affine", 1.0, 0.2).growth_constant()));
  CHECK_THROWS_AS(make_coefficient("cubic", 1.0), DomainError);
}

TEST_CASE("linear propagation") {
  const GridSpec g = make_grid(1, 4.0, 32);
  const ModeTable t = mode_table(g);
  const StateVector s = random_state(g, 2);
  const double k = 1.5;

  const StateVector same = linear_propagate(s, 0.0, k);
  CHECK(same.position.coefficients == s.position.coefficients);
  CHECK(same.velocity.coefficients == s.velocity.coefficients);

  SUBCASE("closed form per mode") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      const double dt = 2 * U(rng);
      const StateVector p = linear_propagate(s, dt, k);
      for (int r = 0; r < 20; ++r) {
        const std::size_t j = rng() % t.xi_norm.size();
        const double w = std::pow(t.xi_norm[j], k);
        const std::complex<double> u = std::cos(dt * w) * s.position.coefficients[j] +
                                       fourier_G({k, 1.0}, dt, t.xi_norm[j]) * s.velocity.coefficients[j];
        const std::complex<double> v = -w * std::sin(dt * w) * s.position.coefficients[j] +
                                       std::cos(dt * w) * s.velocity.coefficients[j];
        CHECK(std::abs(p.position.coefficients[j] - u) <= 1e-12 * std::max(1.0, std::abs(u)));
        CHECK(std::abs(p.velocity.coefficients[j] - v) <= 1e-12 * std::max(1.0, std::abs(v)));
      }
    }
  }
  SUBCASE("group property") {
    const StateVector a = linear_propagate(linear_propagate(s, 0.37, k), 0.81, k);
    const StateVector b = linear_propagate(s, 1.18, k);
    CHECK(rel_diff(a.position, b.position) < 1e-12);
    CHECK(rel_diff(a.velocity, b.velocity) < 1e-12);
  }
  SUBCASE("energy per mode") {
    const StateVector p = linear_propagate(s, 0.9, k);
    for (std::size_t j = 0; j < t.xi_norm.size(); ++j) {
      const double w = std::pow(t.xi_norm[j], k);
      const double e0 = w * w * std::norm(s.position.coefficients[j]) + std::norm(s.velocity.coefficients[j]);
      const double e1 = w * w * std::norm(p.position.coefficients[j]) + std::norm(p.velocity.coefficients[j]);
      CHECK(e1 == doctest::Approx(e0).epsilon(1e-12));
    }
  }
}

TEST_CASE("step") {
  const GridSpec g = make_grid(1, 4.0, 32);
  const double dt = 0.05, k = 1.0;
  NoiseIncrement inc{zero_real(g), zero_spectral(g), dt};

  SUBCASE("no forcing is the linear propagator") {
    const StateVector s = random_state(g, 8);
    const StateVector a = step(s, inc, {}, {}, dt, k), b = linear_propagate(s, dt, k);
    CHECK(a.position.coefficients == b.position.coefficients);
    CHECK(a.velocity.coefficients == b.velocity.coefficients);
  }
  SUBCASE("linear drift on a single mode") {
    const int j = 3;
    StateVector s{forward(cosine_mode(g, j)), zero_spectral(g)};
    const double lambda = 0.7, xi = j * g.dxi;
    const StateVector a = step(s, inc, {}, make_coefficient("linear", lambda), dt, k);
    const StateVector free = linear_propagate(s, dt, k);
    const std::complex<double> expect =
        free.position.coefficients[j] + fourier_G({k, 1.0}, dt, xi) * lambda * s.position.coefficients[j] * dt;
    CHECK(std::abs(a.position.coefficients[j] - expect) < 1e-12);
    const std::complex<double> expect_v =
        free.velocity.coefficients[j] + fourier_dG({k, 1.0}, dt, xi) * lambda * s.position.coefficients[j] * dt;
    CHECK(std::abs(a.velocity.coefficients[j] - expect_v) < 1e-12);
  }
  CHECK_THROWS_AS(step(random_state(g, 1), inc, {}, {}, 2 * dt, k), DomainError);
}

TEST_CASE("solve_path without forcing is exact for any dt") {
  const int j = 5;
  SUBCASE("position data") {
    SolverConfig c = quiet_config(1.3, 1.0, 32, 0.3);
    c.v0 = cosine_mode(c.grid, j);
    c.store_states = true;
    const Trajectory tr = solve_path(c);
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == doctest::Approx(1.0));
    const double w = std::pow(j * c.grid.dxi, 1.3);
    const auto& u = tr.states.back().position.coefficients;
    CHECK(std::abs(u[j] - std::cos(w) * c.grid.L) < 1e-12);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (static_cast<int>(i) != j) CHECK(std::abs(u[i]) < 1e-12);
  }
  SUBCASE("velocity data") {
    SolverConfig c = quiet_config(2.0, 0.7, 32, 0.3);
    c.v0_tilde = cosine_mode(c.grid, j);
    c.store_states = true;
    const Trajectory tr = solve_path(c);
    const double G = fourier_G({2.0, 0.7}, 0.7, j * c.grid.dxi);
    CHECK(std::abs(tr.states.back().position.coefficients[j] - G * c.grid.L) < 1e-12);
  }
}

TEST_CASE("snapshots and validation") {
  SolverConfig c = quiet_config(1.0, 1.0, 16, 0.125);
  c.snapshot_times = {0.25, 0.5};
  const Trajectory tr = solve_path(c);
  CHECK(tr.times == std::vector<double>{0.0, 0.25, 0.5, 1.0});
  c.snapshot_times = {0.3};
  CHECK_THROWS_AS(solve_path(c), DomainError);
  c.snapshot_times.clear();
  c.dt = 2.0;
  CHECK_THROWS_AS(solve_path(c), DomainError);
  c.dt = 0.125;
  c.measure = FlatDensity{1.0, 2};
  CHECK_THROWS_AS(solve_path(c), DomainError);
}

TEST_CASE("blow-up guard") {
  SolverConfig c = quiet_config(1.0, 1.0, 16, 0.125);
  c.v0_bump_amplitude = 1e13;
  c.b = make_coefficient("linear", 1.0);
  CHECK_THROWS_AS(solve_path(c), NumericalError);
}

TEST_CASE("noise paths are reproducible") {
  SolverConfig c = quiet_config(1.0, 0.5, 64, 1.0 / 64);
  c.grid = make_grid(1, 8.0, 64);
  c.measure = RieszKernel{0.5, 1, 1.0};
  c.sigma = make_coefficient("linear", 0.5);
  c.v0_bump_amplitude = 1.0;
  c.seed = 77;
  const Trajectory a = solve_path(c, 3), b = solve_path(c, 3), other = solve_path(c, 4);
  CHECK(a.sobolev_sq == b.sobolev_sq);
  CHECK(a.sobolev_sq.back() != other.sobolev_sq.back());
}

TEST_CASE("weak self-convergence under dt halving") {
  // Common noise: the coarse runs sum the fine sub-increments.
  SolverConfig c = quiet_config(1.0, 1.0, 64, 1.0);
  c.grid = make_grid(1, 8.0, 64);
  c.measure = RieszKernel{0.5, 1, 1.0};
  c.sigma = make_coefficient("linear", 1.0);
  c.v0_bump_amplitude = 1.0;
  c.seed = 5;
  const int paths = 500, finest = 7;
  std::vector<double> means;
  for (int e = 3; e <= finest; ++e) {
    c.dt = std::ldexp(1.0, -e);
    c.noise_substeps = 1u << (finest - e);
    double m = 0;
    for (int p = 0; p < paths; ++p) m += solve_path(c, p).sobolev_sq.back();
    means.push_back(m / paths);
  }
  for (std::size_t i = 2; i < means.size(); ++i) {
    const double ratio = (means[i] - means[i - 1]) / (means[i - 1] - means[i - 2]);
    CAPTURE(i);
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);
  }
}

TEST_CASE("picard iteration") {
  SUBCASE("no forcing: every distance is zero") {
    SolverConfig c = quiet_config(1.0, 0.5, 32, 1.0 / 32);
    c.v0_bump_amplitude = 1.0;
    const PicardResult r = picard_iterate(c, 4);
    for (double d : r.distances) CHECK(d == 0.0);
  }
  SUBCASE("linear sigma contracts to the solve_path fixed point") {
    SolverConfig c = quiet_config(1.0, 0.5, 128, 1.0 / 256);
    c.grid = make_grid(1, 8.0, 128);
    c.measure = RieszKernel{0.5, 1, 1.0};
    c.sigma = make_coefficient("linear", 0.5);
    c.v0_bump_amplitude = 1.0;
    c.seed = 3;
    c.store_states = true;
    const PicardResult r = picard_iterate(c, 25);
    for (std::size_t i = 1; i < 6; ++i) CHECK(r.distances[i] / r.distances[i - 1] < 0.9);
    const RealField direct = inverse(solve_path(c).states.back().position);
    const RealField& fixed = r.final_positions.back();
    double acc = 0;
    for (std::size_t p = 0; p < direct.values.size(); ++p) acc += std::pow(direct.values[p] - fixed.values[p], 2);
    CHECK(std::sqrt(acc * c.grid.dx) <= 1e-8);
  }
  SUBCASE("forced Z is rejected") {
    SolverConfig c = quiet_config(1.0, 0.5, 32, 1.0 / 32);
    c.forced_Z = DeterministicZ{};
    CHECK_THROWS_AS(picard_iterate(c, 4), DomainError);
  }
}

TEST_CASE("fault injection flips the propagator") {
  SolverConfig c = quiet_config(1.0, 1.0, 32, 0.25);
  c.v0_tilde = cosine_mode(c.grid, 2);
  const double good = solve_path(c).sobolev_sq.back();
  set_fault_injection(true);
  CHECK(fault_injection_enabled());
  const double bad = solve_path(c).sobolev_sq.back();
  set_fault_injection(false);
  CHECK(good != doctest::Approx(bad));
}
