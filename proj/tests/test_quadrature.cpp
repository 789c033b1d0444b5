// Reference values come from tools/oracles.py (scipy/mpmath).
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "fracwave/error.hpp"
#include "fracwave/lattice.hpp"
#include "fracwave/propagator.hpp"
#include "fracwave/quadrature.hpp"

using namespace fracwave;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOracleTol = 1e-6;

DeterministicZ bump(int d = 1) {
  DeterministicZ z;
  z.shape = GaussianBump{d, 1.0};
  return z;
}

const SpectralMeasure riesz05 = RieszKernel{0.5, 1, 1.0};

double J(const SpectralMeasure& mu, double k, double alpha, double s, double xi) {
  const double x[] = {xi};
  return weighted_kernel_integral(mu, k, alpha, s, x);
}

}  // namespace

TEST_CASE("weighted kernel integral") {
  SUBCASE("single atom evaluates the integrand") {
    const FiniteAtoms atom{1, {{{0.0}, 0.8}}};
    const double xi = 1.7, k = 1.0, alpha = 0.3, s = 0.6;
    const double g = fourier_G({k, 1.0}, s, xi);
    CHECK(J(atom, k, alpha, s, xi) == doctest::Approx(0.8 * std::pow(1 + xi * xi, alpha) * g * g).epsilon(1e-13));
  }
  SUBCASE("riesz oracles") {
    CHECK(J(riesz05, 1.0, 0.0, 1.0, 0.0) == doctest::Approx(4.72654360241471).epsilon(kOracleTol));
    CHECK(J(riesz05, 1.0, 0.0, 1.0, 2.5) == doctest::Approx(2.170249618810113).epsilon(kOracleTol));
  }
  SUBCASE("brute-force Riemann sum at xi=0") {
    // eta = +-v^2 removes the origin singularity: 4 int_0^100 sin^2(v^2)/v^4 dv.
    const int n = 1'000'000;
    const double h = 100.0 / n;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
      const double v = (i + 0.5) * h, w = v * v;
      sum += 4 * std::pow(std::sin(w) / w, 2);
    }
    CHECK(J(riesz05, 1.0, 0.0, 1.0, 0.0) == doctest::Approx(sum * h).epsilon(1e-4));
  }
  SUBCASE("uniform bound over an (s, xi) grid") {
    for (double k : {1.0, 2.0}) {
      for (double alpha : {0.0, 0.25}) {
        const double T = 1.0, gamma = k - alpha;
        const double xi0[] = {0.0};
        const double bound = std::pow(2.0, k) * (1 + T * T) * shifted_condition_integral(riesz05, gamma, xi0);
        for (double s : {0.1, 0.5, 1.0})
          for (double xi : {-6.0, -1.0, 0.0, 0.4, 2.0, 9.0}) CHECK(J(riesz05, k, alpha, s, xi) <= bound * (1 + 1e-6));
      }
    }
  }
}

TEST_CASE("shift bound") {
  // The bound needs mu to be the transform of a non-negative covariance, so
  // symmetric off-origin atom pairs (covariance cos) are not covered.
  const SpectralMeasure measures[] = {riesz05, RieszKernel{0.9, 1, 1.0}, FiniteAtoms{1, {{{0.0}, 1.0}}}};
  for (const auto& mu : measures) {
    for (double gamma : {0.8, 1.0, 2.0}) {
      const double zero[] = {0.0};
      const double at0 = shifted_condition_integral(mu, gamma, zero);
      for (int i = 0; i < 50; ++i) {
        const double xi[] = {-10.0 + 20.0 * i / 49};
        CHECK(shifted_condition_integral(mu, gamma, xi) <= at0 * (1 + 1e-6));
      }
    }
  }
  const double two[] = {2.0};
  CHECK(shifted_condition_integral(riesz05, 1.0, two) == doctest::Approx(2.52739829678491).epsilon(kOracleTol));
  const double zero[] = {0.0};
  CHECK(shifted_condition_integral(riesz05, 1.0, zero) == doctest::Approx(4.44288293815837).epsilon(kOracleTol));
}

TEST_CASE("isometry functional oracles") {
  CHECK(isometry_functional(riesz05, 1.0, 0.0, bump(), 1.0, true) ==
        doctest::Approx(20.16109249183669).epsilon(kOracleTol));
  CHECK(isometry_functional(riesz05, 1.0, 0.25, bump(), 1.0, true) ==
        doctest::Approx(25.618337356000637).epsilon(kOracleTol));
  const FiniteAtoms atoms{1, {{{1.5}, 0.7}, {{-1.5}, 0.7}}};
  CHECK(isometry_functional(atoms, 1.0, 0.25, bump(), 1.0, false) ==
        doctest::Approx(4.1568371572926255).epsilon(kOracleTol));
  CHECK(isometry_functional(FlatDensity{1.0, 3}, 2.0, 0.0, bump(3), 1.0, false) ==
        doctest::Approx(10254.818313130063).epsilon(kOracleTol));
  CHECK(isometry_functional(RieszKernel{1.0, 2, 1.0}, 1.0, 0.0, bump(2), 1.0, false) ==
        doctest::Approx(567.685969563197).epsilon(kOracleTol));
}

TEST_CASE("isometry functional properties") {
  CHECK(isometry_functional(riesz05, 1.0, 0.25, bump(), 0.0, true) == 0.0);
  const double fwd = isometry_functional(riesz05, 1.0, 0.25, bump(), 0.8, false);
  const double rev = isometry_functional(riesz05, 1.0, 0.25, bump(), 0.8, true);
  CHECK(fwd == doctest::Approx(rev).epsilon(1e-8));
  SUBCASE("a constant time profile takes the time-quadrature route to the same value") {
    DeterministicZ z = bump();
    z.time_profile = [](double) { return 1.0; };
    CHECK(isometry_functional(riesz05, 1.0, 0.25, z, 0.8, false) == doctest::Approx(fwd).epsilon(1e-6));
  }
  SUBCASE("lattice transform of the bump as Z") {
    const GridSpec g = make_grid(1, 8.0, 256);
    DeterministicZ z;
    z.shape = GridFunction{forward(gaussian_bump(g))};
    const FiniteAtoms atoms{1, {{{1.5}, 0.7}, {{-1.5}, 0.7}}};
    CHECK(isometry_functional(atoms, 1.0, 0.25, z, 1.0, false) ==
          doctest::Approx(isometry_functional(atoms, 1.0, 0.25, bump(), 1.0, false)).epsilon(1e-6));
  }
  SUBCASE("doubling the truncation radius") {
    QuadratureSettings s;
    const double a = isometry_functional(riesz05, 1.0, 0.25, bump(), 1.0, true, s);
    s.truncation_radius *= 2;
    const double b = isometry_functional(riesz05, 1.0, 0.25, bump(), 1.0, true, s);
    CHECK(std::abs(a / b - 1) < 10 * s.rel_tol);
  }
  SUBCASE("burkholder bound dominates") {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(-5.0 + 0.5 * i);
    for (double t : {0.25, 0.5, 1.0})
      CHECK(isometry_functional(riesz05, 1.0, 0.25, bump(), t, true) <=
            burkholder_bound(riesz05, 1.0, 0.25, bump(), t, grid));
  }
}

TEST_CASE("increasing process") {
  CHECK(increasing_process(riesz05, 1.0, 0.0, bump(), 0.0) == 0.0);
  CHECK(increasing_process(riesz05, 1.0, 0.0, bump(), 1.0) ==
        doctest::Approx(isometry_functional(riesz05, 1.0, 0.0, bump(), 1.0, false)).epsilon(1e-10));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    double a = U(rng), b = U(rng);
    if (a > b) std::swap(a, b);
    CHECK(increasing_process(riesz05, 1.0, 0.0, bump(), a) <= increasing_process(riesz05, 1.0, 0.0, bump(), b));
  }
}

TEST_CASE("increment second moment") {
  CHECK(increment_second_moment(riesz05, 1.0, 0.0, bump(), 0.5, 0.5) == 0.0);
  CHECK(increment_second_moment(riesz05, 1.0, 0.0, bump(), 0.0, 0.6) ==
        doctest::Approx(isometry_functional(riesz05, 1.0, 0.0, bump(), 0.6, true)).epsilon(1e-8));
  CHECK(increment_second_moment(riesz05, 1.0, 0.0, bump(), 0.5, 0.75) ==
        doctest::Approx(3.460928398322734).epsilon(kOracleTol));
  for (double t2 : {0.6, 0.75, 1.0}) {
    CHECK(increment_second_moment_via_covariance(riesz05, 1.0, 0.25, bump(), 0.5, t2) ==
          doctest::Approx(increment_second_moment(riesz05, 1.0, 0.25, bump(), 0.5, t2)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(increment_second_moment(riesz05, 1.0, 0.0, bump(), 0.7, 0.5), DomainError);
}

TEST_CASE("power-law fits") {
  std::vector<double> lags, m;
  for (int e = 3; e <= 10; ++e) {
    lags.push_back(std::ldexp(1.0, -e));
    m.push_back(3.2 * std::pow(lags.back(), 1.5));
  }
  const PowerLawFit f = fit_power_law(lags, m);
  CHECK(f.slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.2)).epsilon(1e-12));
  CHECK(f.residual < 1e-12);

  SUBCASE("k=1 beta=0.5 alpha=0 d=1") {
    CHECK(std::abs(scaling_slope(riesz05, 1.0, 0.0, bump(), 0.5, lags).slope - 1.5) <= 0.05);
  }
  SUBCASE("k=1 beta=1 alpha=0 d=2") {
    CHECK(std::abs(scaling_slope(RieszKernel{1.0, 2, 1.0}, 1.0, 0.0, bump(2), 0.5, lags).slope - 1.0) <= 0.05);
  }
  SUBCASE("k=2 beta=1 alpha=0.25 approaches 1.25 at small lags") {
    std::vector<double> small;
    for (int e = 10; e <= 14; ++e) small.push_back(std::ldexp(1.0, -e));
    CHECK(std::abs(scaling_slope(RieszKernel{1.0, 1, 1.0}, 2.0, 0.25, bump(), 0.5, small).slope - 1.25) <= 0.02);
  }
}
